#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "altdiff/binmatrix.hpp"
#include "altdiff/bitword.hpp"
#include "altdiff/difference_op.hpp"
#include "altdiff/errors.hpp"
#include "altdiff/rng.hpp"

namespace altdiff {

class SboxSpec {
public:
    SboxSpec() = default;

    explicit SboxSpec(std::vector<std::uint32_t> table) : table_(std::move(table)) {
        const std::size_t q = table_.size();
        if (q < 2 || (q & (q - 1)) != 0) {
            throw dimension_error("s-box size must be a power of two");
        }
        bits_ = 0;
        while ((std::size_t{1} << bits_) < q) {
            ++bits_;
        }
        inverse_.assign(q, static_cast<std::uint32_t>(q));
        for (std::uint32_t x = 0; x < q; ++x) {
            const std::uint32_t y = table_[x];
            if (y >= q || inverse_[y] != q) {
                throw verification_error("s-box is not a bijection");
            }
            inverse_[y] = x;
        }
    }

    // One hex digit per entry for 4-bit boxes, two for 8-bit, and so on.
    static SboxSpec parse_hex(std::string_view text, unsigned bits) {
        const std::size_t width = (bits + 3) / 4;
        const std::size_t q = std::size_t{1} << bits;
        if (text.size() != q * width) {
            throw parse_error("s-box hex string must have " + std::to_string(q * width) + " digits");
        }
        std::vector<std::uint32_t> table(q);
        for (std::size_t i = 0; i < q; ++i) {
            table[i] = static_cast<std::uint32_t>(parse_hex_value(text.substr(i * width, width)));
        }
        return SboxSpec(std::move(table));
    }

    unsigned bits() const { return bits_; }
    std::uint32_t size() const { return static_cast<std::uint32_t>(table_.size()); }
    std::uint32_t operator()(std::uint32_t x) const { return table_[x]; }
    std::uint32_t invert(std::uint32_t y) const { return inverse_[y]; }
    const std::vector<std::uint32_t>& table() const { return table_; }
    const std::vector<std::uint32_t>& inverse_table() const { return inverse_; }

    std::string hex() const {
        std::string out;
        for (std::uint32_t v : table_) {
            out += to_hex(v, bits_);
        }
        return out;
    }

    static SboxSpec identity(unsigned bits) {
        std::vector<std::uint32_t> t(std::size_t{1} << bits);
        for (std::uint32_t i = 0; i < t.size(); ++i) {
            t[i] = i;
        }
        return SboxSpec(std::move(t));
    }

private:
    unsigned bits_ = 0;
    std::vector<std::uint32_t> table_;
    std::vector<std::uint32_t> inverse_;
};

// Iterated SPN: every round applies the s-box to each block, then the
// diffusion matrix (x -> x*lambda), then XORs the round key. There is no
// whitening key and the last round keeps its diffusion layer.
class CipherSpec {
public:
    static constexpr unsigned table_limit = 20;

    CipherSpec(Geometry geometry, SboxSpec sbox, BinMatrix diffusion, unsigned rounds)
        : geometry_(geometry), sbox_(std::move(sbox)), diffusion_(std::move(diffusion)), rounds_(rounds) {
        if (geometry_.bits() == 0 || geometry_.bits() > 64) {
            throw dimension_error("state size must be in 1..64 bits");
        }
        if (sbox_.bits() != geometry_.block_bits) {
            throw dimension_error("s-box width does not match block size");
        }
        if (!diffusion_.is_square() || diffusion_.rows() != geometry_.bits()) {
            throw dimension_error("diffusion matrix must be N x N");
        }
        auto inv = diffusion_.inverse();
        if (!inv) {
            throw verification_error("diffusion matrix is singular");
        }
        diffusion_inverse_ = *inv;
        if (geometry_.bits() <= table_limit) {
            build_tables();
        }
    }

    const Geometry& geometry() const { return geometry_; }
    unsigned bits() const { return geometry_.bits(); }
    const SboxSpec& sbox() const { return sbox_; }
    const BinMatrix& diffusion() const { return diffusion_; }
    const BinMatrix& diffusion_inverse() const { return diffusion_inverse_; }
    unsigned rounds() const { return rounds_; }

    CipherSpec with_rounds(unsigned r) const {
        CipherSpec copy = *this;
        copy.rounds_ = r;
        return copy;
    }

    std::uint64_t substitute(std::uint64_t x) const {
        std::uint64_t y = 0;
        for (unsigned i = 0; i < geometry_.blocks; ++i) {
            const unsigned s = geometry_.block_shift(i);
            y |= static_cast<std::uint64_t>(sbox_(static_cast<std::uint32_t>((x >> s) & geometry_.block_mask()))) << s;
        }
        return y;
    }

    std::uint64_t inverse_substitute(std::uint64_t y) const {
        std::uint64_t x = 0;
        for (unsigned i = 0; i < geometry_.blocks; ++i) {
            const unsigned s = geometry_.block_shift(i);
            x |= static_cast<std::uint64_t>(sbox_.invert(static_cast<std::uint32_t>((y >> s) & geometry_.block_mask()))) << s;
        }
        return x;
    }

    std::uint64_t diffuse(std::uint64_t x) const { return diffusion_.apply(x); }
    std::uint64_t inverse_diffuse(std::uint64_t y) const { return diffusion_inverse_.apply(y); }

    // Keyless part of one round: substitution then diffusion.
    std::uint64_t round_core(std::uint64_t x) const {
        if (forward_) {
            return (*forward_)[x];
        }
        return diffuse(substitute(x));
    }

    std::uint64_t inverse_round_core(std::uint64_t y) const {
        if (backward_) {
            return (*backward_)[y];
        }
        return inverse_substitute(inverse_diffuse(y));
    }

    bool has_tables() const { return forward_ != nullptr; }

private:
    void build_tables() {
        const std::size_t q = std::size_t{1} << geometry_.bits();
        auto fwd = std::make_shared<std::vector<std::uint32_t>>(q);
        auto bwd = std::make_shared<std::vector<std::uint32_t>>(q);
        MatrixApplier apply(diffusion_);
        for (std::size_t x = 0; x < q; ++x) {
            const auto y = static_cast<std::uint32_t>(apply(substitute(x)));
            (*fwd)[x] = y;
            (*bwd)[y] = static_cast<std::uint32_t>(x);
        }
        forward_ = std::move(fwd);
        backward_ = std::move(bwd);
    }

    Geometry geometry_;
    SboxSpec sbox_;
    BinMatrix diffusion_;
    BinMatrix diffusion_inverse_;
    unsigned rounds_;
    std::shared_ptr<const std::vector<std::uint32_t>> forward_;
    std::shared_ptr<const std::vector<std::uint32_t>> backward_;
};

// Independent round keys ("long key"), one N-bit word per round.
struct LongKey {
    std::vector<std::uint64_t> round_keys;
    std::uint64_t seed = 0;
};

inline LongKey keygen(const CipherSpec& spec, std::uint64_t seed) {
    LongKey key;
    key.seed = seed;
    CounterRng rng(seed);
    key.round_keys.resize(spec.rounds());
    for (unsigned i = 0; i < spec.rounds(); ++i) {
        key.round_keys[i] = rng.at(i) & spec.geometry().mask();
    }
    return key;
}

inline void check_key(const CipherSpec& spec, const LongKey& key) {
    if (key.round_keys.size() != spec.rounds()) {
        throw dimension_error("long key has " + std::to_string(key.round_keys.size()) +
                              " round keys, cipher has " + std::to_string(spec.rounds()) + " rounds");
    }
}

inline std::uint64_t encrypt(const CipherSpec& spec, const LongKey& key, std::uint64_t x) {
    check_key(spec, key);
    for (std::uint64_t k : key.round_keys) {
        x = spec.round_core(x) ^ k;
    }
    return x;
}

inline std::uint64_t decrypt(const CipherSpec& spec, const LongKey& key, std::uint64_t y) {
    check_key(spec, key);
    for (auto it = key.round_keys.rbegin(); it != key.round_keys.rend(); ++it) {
        y = spec.inverse_round_core(y ^ *it);
    }
    return y;
}

inline BitWord encrypt(const CipherSpec& spec, const LongKey& key, const BitWord& x) {
    if (x.size() != spec.bits()) {
        throw dimension_error("plaintext length does not match the cipher");
    }
    return BitWord(encrypt(spec, key, x.value()), spec.geometry());
}

inline BitWord decrypt(const CipherSpec& spec, const LongKey& key, const BitWord& y) {
    if (y.size() != spec.bits()) {
        throw dimension_error("ciphertext length does not match the cipher");
    }
    return BitWord(decrypt(spec, key, y.value()), spec.geometry());
}

// counts[din][dout] over all x of pairs (x, x <> din) whose images have
// <>-difference dout, for the difference operator <>.
class DDTable {
public:
    DDTable(unsigned bits, std::vector<std::uint32_t> counts, std::string tag)
        : bits_(bits), counts_(std::move(counts)), tag_(std::move(tag)) {}

    unsigned bits() const { return bits_; }
    std::uint32_t size() const { return 1u << bits_; }
    const std::string& tag() const { return tag_; }
    std::uint32_t at(std::uint32_t din, std::uint32_t dout) const { return counts_[din * size() + dout]; }
    const std::vector<std::uint32_t>& counts() const { return counts_; }

    std::uint32_t uniformity() const {
        std::uint32_t best = 0;
        for (std::uint32_t din = 1; din < size(); ++din) {
            for (std::uint32_t dout = 0; dout < size(); ++dout) {
                best = std::max(best, at(din, dout));
            }
        }
        return best;
    }

    std::string to_csv() const {
        std::ostringstream out;
        out << "din\\dout";
        for (std::uint32_t c = 0; c < size(); ++c) {
            out << ',' << to_hex(c, bits_);
        }
        out << '\n';
        for (std::uint32_t r = 0; r < size(); ++r) {
            out << to_hex(r, bits_);
            for (std::uint32_t c = 0; c < size(); ++c) {
                out << ',' << at(r, c);
            }
            out << '\n';
        }
        return out.str();
    }

    // Aligned table with zero counts shown as '.'.
    std::string to_text() const {
        std::ostringstream out;
        const std::string label = tag_ == "xor" ? "+" : "o";
        out << label << "  |";
        for (std::uint32_t c = 0; c < size(); ++c) {
            out << ' ' << pad(to_hex(c, bits_));
        }
        out << '\n' << std::string(4 + size() * 3, '-') << '\n';
        for (std::uint32_t r = 0; r < size(); ++r) {
            out << to_hex(r, bits_) << "  |";
            for (std::uint32_t c = 0; c < size(); ++c) {
                const std::uint32_t v = at(r, c);
                out << ' ' << pad(v == 0 ? std::string(".") : std::to_string(v));
            }
            out << '\n';
        }
        return out.str();
    }

private:
    static std::string pad(const std::string& s) { return s.size() >= 2 ? s : std::string(2 - s.size(), ' ') + s; }

    unsigned bits_;
    std::vector<std::uint32_t> counts_;
    std::string tag_;
};

inline DDTable ddt(const SboxSpec& sbox, const BlockOperation& op) {
    if (op.bits() != sbox.bits()) {
        throw dimension_error("operation width does not match s-box width");
    }
    const std::uint32_t q = sbox.size();
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(q) * q, 0);
    for (std::uint32_t din = 0; din < q; ++din) {
        for (std::uint32_t x = 0; x < q; ++x) {
            const std::uint32_t dout = op.difference(sbox(x), sbox(op.add(x, din)));
            ++counts[din * q + dout];
        }
    }
    return DDTable(sbox.bits(), std::move(counts), op.tag());
}

inline const char* toy16_sbox_hex() { return "0EB17C96D34F28A5"; }

inline const char* toy16_diffusion_text() {
    return "0000000000001000\n"
           "0010001000100111\n"
           "0010001000100000\n"
           "0000000000000001\n"
           "1000000000000000\n"
           "0111001000100010\n"
           "0000001000100010\n"
           "0001000000000000\n"
           "0000100000000000\n"
           "0010011100100010\n"
           "0010000000100010\n"
           "0000000100000000\n"
           "0000000010000000\n"
           "0010001001110010\n"
           "0010001000000010\n"
           "0000000000010000\n";
}

// The 16-bit toy SPN: four copies of the 4-bit s-box and a 16x16 diffusion
// matrix built from cyclically shifted 4x4 sub-blocks.
inline CipherSpec toy16_cipher(unsigned rounds = 17) {
    return CipherSpec(Geometry{4, 4}, SboxSpec::parse_hex(toy16_sbox_hex(), 4),
                      BinMatrix::parse(toy16_diffusion_text()), rounds);
}

// Cipher spec file:
//   blocks <m>
//   block_bits <nb>
//   rounds <r>
//   sbox <hex>
//   diffusion
//   <N rows of 0/1>
inline CipherSpec parse_cipher_spec(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    unsigned blocks = 0;
    unsigned block_bits = 0;
    unsigned rounds = 0;
    bool have_rounds = false;
    std::string sbox_hex;
    std::string matrix_text;
    bool in_matrix = false;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::string key;
        if (!(fields >> key)) {
            continue;
        }
        if (in_matrix && key.find_first_not_of("01") == std::string::npos) {
            matrix_text += key + "\n";
            continue;
        }
        in_matrix = false;
        if (key == "blocks") {
            if (!(fields >> blocks)) throw parse_error("bad 'blocks' line");
        } else if (key == "block_bits") {
            if (!(fields >> block_bits)) throw parse_error("bad 'block_bits' line");
        } else if (key == "rounds") {
            if (!(fields >> rounds)) throw parse_error("bad 'rounds' line");
            have_rounds = true;
        } else if (key == "sbox") {
            if (!(fields >> sbox_hex)) throw parse_error("bad 'sbox' line");
        } else if (key == "diffusion") {
            in_matrix = true;
        } else {
            throw parse_error("unknown key '" + key + "' in cipher spec");
        }
    }
    if (blocks == 0 || block_bits == 0 || sbox_hex.empty() || matrix_text.empty() || !have_rounds) {
        throw parse_error("cipher spec needs blocks, block_bits, rounds, sbox and diffusion");
    }
    if (block_bits > 16) {
        throw capacity_error("s-boxes wider than 16 bits are not supported");
    }
    const Geometry g{blocks, block_bits};
    BinMatrix diffusion = BinMatrix::parse(matrix_text);
    if (!diffusion.is_square()) {
        throw parse_error("diffusion matrix is not square");
    }
    return CipherSpec(g, SboxSpec::parse_hex(sbox_hex, block_bits), std::move(diffusion), rounds);
}

inline std::string cipher_spec_text(const CipherSpec& spec) {
    std::string out;
    out += "blocks " + std::to_string(spec.geometry().blocks) + "\n";
    out += "block_bits " + std::to_string(spec.geometry().block_bits) + "\n";
    out += "rounds " + std::to_string(spec.rounds()) + "\n";
    out += "sbox " + spec.sbox().hex() + "\n";
    out += "diffusion\n" + spec.diffusion().to_text();
    return out;
}

// "paper16" (alias "toy16") or a path to a cipher spec file.
inline CipherSpec resolve_cipher(const std::string& name_or_path) {
    if (name_or_path == "paper16" || name_or_path == "toy16") {
        return toy16_cipher();
    }
    return parse_cipher_spec(read_text_file(name_or_path));
}

}  // namespace altdiff
