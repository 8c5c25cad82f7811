#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "altdiff/errors.hpp"

namespace altdiff {

// m blocks of nb bits; block 0 occupies the most significant bits.
struct Geometry {
    unsigned blocks = 1;
    unsigned block_bits = 1;

    constexpr unsigned bits() const { return blocks * block_bits; }
    constexpr std::uint64_t mask() const {
        return bits() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits()) - 1;
    }
    constexpr std::uint64_t block_mask() const {
        return block_bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << block_bits) - 1;
    }
    constexpr unsigned block_shift(unsigned block) const {
        return block_bits * (blocks - 1 - block);
    }

    friend constexpr bool operator==(const Geometry&, const Geometry&) = default;
};

inline std::uint64_t low_mask(unsigned bits) {
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

// Fixed-width uppercase hex, ceil(bits / 4) digits.
inline std::string to_hex(std::uint64_t value, unsigned bits) {
    static constexpr char digits[] = "0123456789ABCDEF";
    const unsigned width = bits == 0 ? 1 : (bits + 3) / 4;
    std::string out(width, '0');
    for (unsigned i = 0; i < width; ++i) {
        out[width - 1 - i] = digits[(value >> (4 * i)) & 0xF];
    }
    return out;
}

inline std::uint64_t parse_hex_value(std::string_view text) {
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        text.remove_prefix(2);
    }
    if (text.empty() || text.size() > 16) {
        throw parse_error("bad hex literal '" + std::string(text) + "'");
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw parse_error("bad hex literal '" + std::string(text) + "'");
    }
    return value;
}

// An N-bit vector over F2. Bit index 1 is the most significant bit of the
// integer encoding, so hex literals read left to right as bits 1..N.
class BitWord {
public:
    BitWord() = default;

    BitWord(std::uint64_t value, Geometry geometry) : value_(value), geometry_(geometry) {
        if (geometry.bits() == 0 || geometry.bits() > 64) {
            throw dimension_error("word length must be in 1..64 bits");
        }
        if ((value & ~geometry.mask()) != 0) {
            throw dimension_error("value 0x" + to_hex(value, 64) + " does not fit in " +
                                  std::to_string(geometry.bits()) + " bits");
        }
    }

    BitWord(std::uint64_t value, unsigned bits) : BitWord(value, Geometry{1, bits}) {}

    static BitWord from_blocks(std::span<const std::uint64_t> blocks, unsigned block_bits) {
        Geometry g{static_cast<unsigned>(blocks.size()), block_bits};
        if (blocks.empty() || g.bits() > 64) {
            throw dimension_error("block decomposition does not fit in 64 bits");
        }
        std::uint64_t value = 0;
        for (std::uint64_t b : blocks) {
            if ((b & ~g.block_mask()) != 0) {
                throw dimension_error("block value exceeds block width");
            }
            value = (value << block_bits) | b;
        }
        return BitWord(value, g);
    }

    // e_index, 1-based.
    static BitWord unit(unsigned index, Geometry geometry) {
        if (index == 0 || index > geometry.bits()) {
            throw dimension_error("unit index out of range");
        }
        return BitWord(std::uint64_t{1} << (geometry.bits() - index), geometry);
    }

    static BitWord parse_hex(std::string_view text, Geometry geometry) {
        return BitWord(parse_hex_value(text), geometry);
    }

    std::uint64_t value() const { return value_; }
    const Geometry& geometry() const { return geometry_; }
    unsigned size() const { return geometry_.bits(); }

    bool bit(unsigned index) const {
        if (index == 0 || index > size()) {
            throw dimension_error("bit index out of range");
        }
        return (value_ >> (size() - index)) & 1;
    }

    std::uint64_t block(unsigned i) const {
        if (i >= geometry_.blocks) {
            throw dimension_error("block index out of range");
        }
        return (value_ >> geometry_.block_shift(i)) & geometry_.block_mask();
    }

    std::vector<std::uint64_t> blocks() const {
        std::vector<std::uint64_t> out(geometry_.blocks);
        for (unsigned i = 0; i < geometry_.blocks; ++i) {
            out[i] = block(i);
        }
        return out;
    }

    bool is_zero() const { return value_ == 0; }
    std::string hex() const { return to_hex(value_, size()); }

    friend bool operator==(const BitWord&, const BitWord&) = default;

private:
    std::uint64_t value_ = 0;
    Geometry geometry_{1, 1};
};

inline void require_same_length(const BitWord& a, const BitWord& b) {
    if (a.size() != b.size()) {
        throw dimension_error("word lengths differ: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
}

inline BitWord xor_words(const BitWord& a, const BitWord& b) {
    require_same_length(a, b);
    return BitWord(a.value() ^ b.value(), a.geometry());
}

inline BitWord operator^(const BitWord& a, const BitWord& b) { return xor_words(a, b); }

}  // namespace altdiff
