#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "altdiff/altop.hpp"
#include "altdiff/bitword.hpp"
#include "altdiff/errors.hpp"

namespace altdiff {

// Difference operator on one s-box-sized block, either XOR or an
// alternative sum, flattened into a Cayley table. In an elementary abelian
// group every element is its own inverse, so the difference of (u, v) is
// simply add(u, v).
class BlockOperation {
public:
    static constexpr unsigned max_bits = 8;

    static BlockOperation xor_op(unsigned bits) {
        check_bits(bits);
        BlockOperation op;
        op.bits_ = bits;
        op.tag_ = "xor";
        const std::uint32_t q = 1u << bits;
        op.sum_.resize(q * q);
        op.dot_.assign(q * q, 0);
        for (std::uint32_t a = 0; a < q; ++a) {
            for (std::uint32_t c = 0; c < q; ++c) {
                op.sum_[a * q + c] = static_cast<std::uint16_t>(a ^ c);
            }
        }
        return op;
    }

    static BlockOperation from(const AltOperation& alt) {
        check_bits(alt.bits());
        BlockOperation op;
        op.bits_ = alt.bits();
        op.tag_ = alt.descriptor();
        op.alt_ = alt;
        const std::uint32_t q = 1u << op.bits_;
        op.sum_.resize(q * q);
        op.dot_.resize(q * q);
        for (std::uint32_t a = 0; a < q; ++a) {
            for (std::uint32_t c = 0; c < q; ++c) {
                op.sum_[a * q + c] = static_cast<std::uint16_t>(alt.add(a, c));
                op.dot_[a * q + c] = static_cast<std::uint16_t>(alt.dot(a, c));
            }
        }
        return op;
    }

    unsigned bits() const { return bits_; }
    std::uint32_t size() const { return 1u << bits_; }
    bool is_xor() const { return !alt_.has_value(); }
    const std::optional<AltOperation>& alternative() const { return alt_; }
    const std::string& tag() const { return tag_; }

    std::uint32_t add(std::uint32_t a, std::uint32_t c) const { return sum_[(a << bits_) | c]; }
    std::uint32_t difference(std::uint32_t u, std::uint32_t v) const { return add(u, v); }
    std::uint32_t dot(std::uint32_t a, std::uint32_t c) const { return dot_[(a << bits_) | c]; }

private:
    static void check_bits(unsigned bits) {
        if (bits == 0 || bits > max_bits) {
            throw capacity_error("block operations are tabulated only up to 8 bits");
        }
    }

    unsigned bits_ = 0;
    std::string tag_;
    std::optional<AltOperation> alt_;
    std::vector<std::uint16_t> sum_;
    std::vector<std::uint16_t> dot_;
};

// Difference operator on the whole state: one BlockOperation per block.
class DifferenceOperation {
public:
    static DifferenceOperation xor_op(Geometry g) {
        DifferenceOperation op;
        op.geometry_ = g;
        op.blocks_.assign(g.blocks, BlockOperation::xor_op(g.block_bits));
        op.tag_ = "xor";
        return op;
    }

    static DifferenceOperation circ(const ParallelOperation& parallel) {
        DifferenceOperation op;
        op.geometry_ = parallel.geometry();
        for (const AltOperation& alt : parallel.blocks()) {
            op.blocks_.push_back(BlockOperation::from(alt));
        }
        op.parallel_ = parallel;
        op.tag_ = parallel.descriptor();
        return op;
    }

    const Geometry& geometry() const { return geometry_; }
    bool is_xor() const { return !parallel_.has_value(); }
    const std::optional<ParallelOperation>& parallel() const { return parallel_; }
    const BlockOperation& block(unsigned i) const { return blocks_.at(i); }
    const std::string& tag() const { return tag_; }

    std::uint64_t add(std::uint64_t a, std::uint64_t c) const {
        if (!parallel_) {
            return a ^ c;
        }
        std::uint64_t out = 0;
        for (unsigned i = 0; i < geometry_.blocks; ++i) {
            const unsigned s = geometry_.block_shift(i);
            out |= static_cast<std::uint64_t>(
                       blocks_[i].add(static_cast<std::uint32_t>((a >> s) & geometry_.block_mask()),
                                      static_cast<std::uint32_t>((c >> s) & geometry_.block_mask())))
                   << s;
        }
        return out;
    }

    std::uint64_t difference(std::uint64_t u, std::uint64_t v) const { return add(u, v); }

private:
    Geometry geometry_;
    std::vector<BlockOperation> blocks_;
    std::optional<ParallelOperation> parallel_;
    std::string tag_;
};

// Parses "circ:<n>:<b-hex>[,<b-hex>...]". A single b is repeated over
// `blocks` blocks; a list must have exactly `blocks` entries unless
// blocks == 0, in which case the list length decides.
inline ParallelOperation parse_parallel_descriptor(std::string_view text, unsigned blocks = 0) {
    if (text.substr(0, 5) != "circ:") {
        throw parse_error("operation descriptor must start with 'circ:'");
    }
    text.remove_prefix(5);
    const std::size_t colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw parse_error("operation descriptor must be circ:<n>:<b-hex>[,...]");
    }
    unsigned n = 0;
    for (char c : text.substr(0, colon)) {
        if (c < '0' || c > '9') {
            throw parse_error("bad block size in operation descriptor");
        }
        n = n * 10 + static_cast<unsigned>(c - '0');
        if (n > 64) {
            throw parse_error("block size too large");
        }
    }
    text.remove_prefix(colon + 1);
    std::vector<std::uint64_t> bs;
    while (true) {
        const std::size_t comma = text.find(',');
        bs.push_back(parse_hex_value(text.substr(0, comma)));
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    if (blocks != 0 && bs.size() == 1 && blocks > 1) {
        bs.assign(blocks, bs.front());
    }
    if (blocks != 0 && bs.size() != blocks) {
        throw dimension_error("descriptor lists " + std::to_string(bs.size()) +
                              " defining vectors for " + std::to_string(blocks) + " blocks");
    }
    std::vector<AltOperation> ops;
    for (std::uint64_t b : bs) {
        ops.emplace_back(n, b);
    }
    return ParallelOperation(std::move(ops));
}

// Operation descriptor file:
//   n <block bits>
//   m <block count>
//   b <hex> [<hex> ...]      (one per block, or one repeated)
inline ParallelOperation parse_operation_file_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    unsigned n = 0;
    unsigned m = 0;
    std::vector<std::string> bs;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::string key;
        if (!(fields >> key)) {
            continue;
        }
        if (key == "n") {
            if (!(fields >> n)) throw parse_error("bad 'n' line in operation file");
        } else if (key == "m") {
            if (!(fields >> m)) throw parse_error("bad 'm' line in operation file");
        } else if (key == "b") {
            std::string h;
            while (fields >> h) bs.push_back(h);
        } else {
            throw parse_error("unknown key '" + key + "' in operation file");
        }
    }
    if (n == 0 || m == 0 || bs.empty()) {
        throw parse_error("operation file needs n, m and b entries");
    }
    std::string desc = "circ:" + std::to_string(n) + ":";
    for (std::size_t i = 0; i < bs.size(); ++i) {
        desc += (i ? "," : "") + bs[i];
    }
    return parse_parallel_descriptor(desc, m);
}

inline std::string operation_file_text(const ParallelOperation& op) {
    std::string out = "n " + std::to_string(op.block(0).bits()) + "\n";
    out += "m " + std::to_string(op.block_count()) + "\nb";
    for (const AltOperation& block : op.blocks()) {
        out += " " + block.b_hex();
    }
    return out + "\n";
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw parse_error("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// "xor", "circ:..." or "@path" to an operation descriptor file.
inline DifferenceOperation parse_operation(std::string_view text, Geometry g) {
    if (text == "xor" || text == "+") {
        return DifferenceOperation::xor_op(g);
    }
    ParallelOperation parallel =
        text.substr(0, 1) == "@" ? parse_operation_file_text(read_text_file(std::string(text.substr(1))))
                                 : parse_parallel_descriptor(text, g.blocks);
    if (parallel.geometry() != g) {
        throw dimension_error("operation geometry does not match the cipher");
    }
    return DifferenceOperation::circ(parallel);
}

}  // namespace altdiff
