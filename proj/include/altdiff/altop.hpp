#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "altdiff/binmatrix.hpp"
#include "altdiff/bitword.hpp"
#include "altdiff/errors.hpp"

namespace altdiff {

// Alternative sum on F2^n whose weak-key space is span{e_3, ..., e_n}
// (dimension n-2). The operation is fixed by a nonzero b in F2^(n-2):
//
//   a o e_i = a M_{e_i} + e_i,   M_{e_j} = I for j >= 3,
//
// where M_{e1} carries b in row 2 of its top-right 2 x (n-2) block and
// M_{e2} carries b in row 1. General sums compose the translations of the
// second operand's decomposition over e_1, e_2 and the weak part.
class AltOperation {
public:
    static constexpr unsigned table_limit = 8;
    static constexpr unsigned axiom_check_limit = 6;

    AltOperation(unsigned n, std::uint64_t b) : n_(n), b_(b) {
        if (n < 3 || n > 32) {
            throw dimension_error("block size must be in 3..32, got " + std::to_string(n));
        }
        if ((b & ~low_mask(n - 2)) != 0) {
            throw dimension_error("defining vector wider than n-2 bits");
        }
        if (b == 0) {
            throw degenerate_operation_error("defining vector b must be nonzero");
        }
        const std::uint64_t e1 = std::uint64_t{1} << (n - 1);
        const std::uint64_t e2 = std::uint64_t{1} << (n - 2);
        tau1_ = BinMatrix::identity(n);
        tau2_ = BinMatrix::identity(n);
        std::vector<std::uint64_t> rows1 = tau1_.row_words();
        std::vector<std::uint64_t> rows2 = tau2_.row_words();
        rows1[1] = e2 | b;
        rows2[0] = e1 | b;
        tau1_ = BinMatrix::from_rows(n, rows1);
        tau2_ = BinMatrix::from_rows(n, rows2);

        if (n <= table_limit) {
            build_tables();
        }
        if (n <= axiom_check_limit) {
            verify_group_axioms();
        }
    }

    static AltOperation make(unsigned n, const BitWord& b) {
        if (b.size() != n - 2) {
            throw dimension_error("defining vector must have n-2 bits");
        }
        return AltOperation(n, b.value());
    }

    unsigned bits() const { return n_; }
    unsigned weak_dimension() const { return n_ - 2; }
    std::uint64_t defining_vector() const { return b_; }
    std::uint64_t size() const { return std::uint64_t{1} << n_; }
    bool has_tables() const { return !sum_table_.empty(); }

    // M_{e_i}, 1-based.
    BinMatrix tau_matrix(unsigned i) const {
        if (i == 0 || i > n_) {
            throw dimension_error("basis index out of range");
        }
        if (i == 1) {
            return tau1_;
        }
        if (i == 2) {
            return tau2_;
        }
        return BinMatrix::identity(n_);
    }

    // a tau_{e_i} = a M_{e_i} + e_i.
    std::uint64_t translate(std::uint64_t a, unsigned i) const {
        const std::uint64_t e = std::uint64_t{1} << (n_ - i);
        if (i == 1) {
            return tau1_.apply(a) ^ e;
        }
        if (i == 2) {
            return tau2_.apply(a) ^ e;
        }
        return a ^ e;
    }

    std::uint64_t add_by_composition(std::uint64_t a, std::uint64_t c) const {
        std::uint64_t r = a;
        std::uint64_t p = 0;
        if ((c >> (n_ - 1)) & 1) {
            r = translate(r, 1);
            p = translate(p, 1);
        }
        if ((c >> (n_ - 2)) & 1) {
            r = translate(r, 2);
            p = translate(p, 2);
        }
        // p agrees with c on the first two coordinates; the rest is weak
        return r ^ (p ^ c);
    }

    std::uint64_t add(std::uint64_t a, std::uint64_t c) const {
        if (has_tables()) {
            return sum_table_[(a << n_) | c];
        }
        return add_by_composition(a, c);
    }

    std::uint64_t dot(std::uint64_t a, std::uint64_t c) const {
        if (has_tables()) {
            return dot_table_[(a << n_) | c];
        }
        return a ^ c ^ add_by_composition(a, c);
    }

    // o-difference after XOR-ing key k onto a pair with o-difference delta.
    std::uint64_t key_diff_transition(std::uint64_t delta, std::uint64_t key) const {
        return delta ^ dot(key, delta);
    }

    bool is_weak(std::uint64_t k) const { return (k >> (n_ - 2)) == 0; }

    std::vector<std::uint64_t> weak_keys() const {
        if (n_ - 2 > 24) {
            throw capacity_error("weak-key space too large to list");
        }
        std::vector<std::uint64_t> out(std::uint64_t{1} << (n_ - 2));
        for (std::uint64_t k = 0; k < out.size(); ++k) {
            out[k] = k;
        }
        return out;
    }

    std::vector<std::uint64_t> error_set() const {
        if (n_ > 10) {
            throw capacity_error("error-set enumeration limited to n <= 10");
        }
        std::set<std::uint64_t> seen;
        for (std::uint64_t a = 0; a < size(); ++a) {
            for (std::uint64_t c = 0; c < size(); ++c) {
                seen.insert(dot(a, c));
            }
        }
        return {seen.begin(), seen.end()};
    }

    BitWord add(const BitWord& a, const BitWord& c) const {
        check(a, c);
        return BitWord(add(a.value(), c.value()), a.geometry());
    }
    BitWord dot(const BitWord& a, const BitWord& c) const {
        check(a, c);
        return BitWord(dot(a.value(), c.value()), a.geometry());
    }
    BitWord key_diff_transition(const BitWord& delta, const BitWord& key) const {
        check(delta, key);
        return BitWord(key_diff_transition(delta.value(), key.value()), delta.geometry());
    }

    std::string b_hex() const {
        std::string h = to_hex(b_, n_ - 2);
        return h.size() < 2 ? std::string(2 - h.size(), '0') + h : h;
    }

    std::string descriptor() const { return "circ:" + std::to_string(n_) + ":" + b_hex(); }

    friend bool operator==(const AltOperation& x, const AltOperation& y) {
        return x.n_ == y.n_ && x.b_ == y.b_;
    }

private:
    void check(const BitWord& a, const BitWord& c) const {
        if (a.size() != n_ || c.size() != n_) {
            throw dimension_error("operand length does not match operation dimension " +
                                  std::to_string(n_));
        }
    }

    void build_tables() {
        const std::uint64_t q = size();
        sum_table_.assign(q * q, 0);
        dot_table_.assign(q * q, 0);
        for (std::uint64_t a = 0; a < q; ++a) {
            for (std::uint64_t c = 0; c < q; ++c) {
                const std::uint64_t s = add_by_composition(a, c);
                sum_table_[(a << n_) | c] = static_cast<std::uint8_t>(s);
                dot_table_[(a << n_) | c] = static_cast<std::uint8_t>(a ^ c ^ s);
            }
        }
    }

    void verify_group_axioms() const {
        const std::uint64_t q = size();
        for (std::uint64_t a = 0; a < q; ++a) {
            if (add(a, 0) != a || add(a, a) != 0) {
                throw verification_error("identity/self-inverse law fails for " + descriptor());
            }
            for (std::uint64_t c = 0; c < q; ++c) {
                const std::uint64_t ac = add(a, c);
                if (ac != add(c, a)) {
                    throw verification_error("commutativity fails for " + descriptor());
                }
                for (std::uint64_t e = 0; e < q; ++e) {
                    if (add(ac, e) != add(a, add(c, e))) {
                        throw verification_error("associativity fails for " + descriptor());
                    }
                }
            }
        }
    }

    unsigned n_;
    std::uint64_t b_;
    BinMatrix tau1_;
    BinMatrix tau2_;
    std::vector<std::uint8_t> sum_table_;
    std::vector<std::uint8_t> dot_table_;
};

// Blockwise sum (x o y)_i = x_i o_i y_i on V_1 + ... + V_m. Blocks share one
// size; block 0 is the most significant.
class ParallelOperation {
public:
    explicit ParallelOperation(std::vector<AltOperation> blocks) : blocks_(std::move(blocks)) {
        if (blocks_.empty()) {
            throw dimension_error("parallel operation needs at least one block");
        }
        const unsigned n = blocks_.front().bits();
        for (const AltOperation& op : blocks_) {
            if (op.bits() != n) {
                throw dimension_error("heterogeneous block sizes are not supported");
            }
        }
        if (n * blocks_.size() > 64) {
            throw dimension_error("parallel operation wider than 64 bits");
        }
    }

    static ParallelOperation uniform(const AltOperation& op, unsigned m) {
        return ParallelOperation(std::vector<AltOperation>(m, op));
    }

    Geometry geometry() const {
        return Geometry{static_cast<unsigned>(blocks_.size()), blocks_.front().bits()};
    }
    unsigned bits() const { return geometry().bits(); }
    unsigned block_count() const { return static_cast<unsigned>(blocks_.size()); }
    const AltOperation& block(unsigned i) const { return blocks_.at(i); }
    const std::vector<AltOperation>& blocks() const { return blocks_; }

    std::uint64_t add(std::uint64_t a, std::uint64_t c) const {
        return blockwise(a, c, [](const AltOperation& op, std::uint64_t x, std::uint64_t y) {
            return op.add(x, y);
        });
    }
    std::uint64_t add_by_composition(std::uint64_t a, std::uint64_t c) const {
        return blockwise(a, c, [](const AltOperation& op, std::uint64_t x, std::uint64_t y) {
            return op.add_by_composition(x, y);
        });
    }
    std::uint64_t dot(std::uint64_t a, std::uint64_t c) const {
        return blockwise(a, c, [](const AltOperation& op, std::uint64_t x, std::uint64_t y) {
            return op.dot(x, y);
        });
    }
    std::uint64_t key_diff_transition(std::uint64_t delta, std::uint64_t key) const {
        return delta ^ dot(key, delta);
    }

    bool is_weak(std::uint64_t k) const {
        const Geometry g = geometry();
        for (unsigned i = 0; i < g.blocks; ++i) {
            if (!blocks_[i].is_weak((k >> g.block_shift(i)) & g.block_mask())) {
                return false;
            }
        }
        return true;
    }

    // Cartesian product of the block weak-key spaces.
    std::vector<std::uint64_t> weak_keys() const {
        std::vector<std::vector<std::uint64_t>> parts;
        for (const AltOperation& op : blocks_) {
            parts.push_back(op.weak_keys());
        }
        return product(parts);
    }

    std::vector<std::uint64_t> error_set() const {
        std::vector<std::vector<std::uint64_t>> parts;
        for (const AltOperation& op : blocks_) {
            parts.push_back(op.error_set());
        }
        return product(parts);
    }

    BitWord add(const BitWord& a, const BitWord& c) const {
        check(a, c);
        return BitWord(add(a.value(), c.value()), geometry());
    }
    BitWord dot(const BitWord& a, const BitWord& c) const {
        check(a, c);
        return BitWord(dot(a.value(), c.value()), geometry());
    }
    BitWord key_diff_transition(const BitWord& delta, const BitWord& key) const {
        check(delta, key);
        return BitWord(key_diff_transition(delta.value(), key.value()), geometry());
    }

    // circ:<n>:<b>,<b>,...
    std::string descriptor() const {
        std::string out = "circ:" + std::to_string(blocks_.front().bits()) + ":";
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            out += (i ? "," : "") + blocks_[i].b_hex();
        }
        return out;
    }

private:
    template <class F>
    std::uint64_t blockwise(std::uint64_t a, std::uint64_t c, F&& f) const {
        const Geometry g = geometry();
        std::uint64_t out = 0;
        for (unsigned i = 0; i < g.blocks; ++i) {
            const unsigned s = g.block_shift(i);
            out |= f(blocks_[i], (a >> s) & g.block_mask(), (c >> s) & g.block_mask()) << s;
        }
        return out;
    }

    std::vector<std::uint64_t> product(const std::vector<std::vector<std::uint64_t>>& parts) const {
        std::uint64_t total = 1;
        for (const auto& p : parts) {
            total *= p.size();
            if (total > (std::uint64_t{1} << 24)) {
                throw capacity_error("product set too large to list");
            }
        }
        const unsigned nb = blocks_.front().bits();
        std::vector<std::uint64_t> out{0};
        for (const auto& p : parts) {
            std::vector<std::uint64_t> next;
            next.reserve(out.size() * p.size());
            for (std::uint64_t prefix : out) {
                for (std::uint64_t v : p) {
                    next.push_back((prefix << nb) | v);
                }
            }
            out = std::move(next);
        }
        return out;
    }

    void check(const BitWord& a, const BitWord& c) const {
        if (a.size() != bits() || c.size() != bits()) {
            throw dimension_error("operand length does not match operation dimension " +
                                  std::to_string(bits()));
        }
    }

    std::vector<AltOperation> blocks_;
};

inline AltOperation make_op(unsigned n, const BitWord& b) { return AltOperation::make(n, b); }

inline ParallelOperation parallel(std::vector<AltOperation> ops) {
    return ParallelOperation(std::move(ops));
}

}  // namespace altdiff
