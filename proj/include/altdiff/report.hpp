#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "altdiff/altop.hpp"
#include "altdiff/analysis.hpp"
#include "altdiff/cipher.hpp"
#include "altdiff/linearity.hpp"

namespace altdiff {

using json = nlohmann::ordered_json;

namespace detail {

template <typename F>
std::string square_csv(const char* corner, unsigned bits, F cell) {
    const std::uint32_t q = 1u << bits;
    const unsigned width = bits;
    std::string out = corner;
    for (std::uint32_t c = 0; c < q; ++c) {
        out += "," + to_hex(c, width);
    }
    out += "\n";
    for (std::uint32_t r = 0; r < q; ++r) {
        out += to_hex(r, width);
        for (std::uint32_t c = 0; c < q; ++c) {
            out += "," + to_hex(cell(r, c), width);
        }
        out += "\n";
    }
    return out;
}

}  // namespace detail

inline std::string format_log2(double p) {
    if (p <= 0.0) {
        return "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", std::log2(p));
    return buf;
}

inline std::string cayley_csv(const AltOperation& op) {
    return detail::square_csv("a\\b", op.bits(), [&](std::uint32_t a, std::uint32_t b) { return op.add(a, b); });
}

inline std::string dot_csv(const AltOperation& op) {
    return detail::square_csv("a\\b", op.bits(), [&](std::uint32_t a, std::uint32_t b) { return op.dot(a, b); });
}

inline std::vector<std::string> hex_list(const std::vector<std::uint64_t>& values, unsigned bits) {
    std::vector<std::string> out;
    for (std::uint64_t v : values) {
        out.push_back(to_hex(v, bits));
    }
    return out;
}

inline json op_info_json(const AltOperation& op) {
    json j;
    j["descriptor"] = op.descriptor();
    j["n"] = op.bits();
    j["b"] = op.b_hex();
    j["weak_dimension"] = op.weak_dimension();
    j["weak_keys"] = hex_list(op.weak_keys(), op.bits());
    j["error_set"] = hex_list(op.error_set(), op.bits());
    return j;
}

inline json matrix_json(const BinMatrix& m) {
    json rows = json::array();
    const std::string text = m.to_text();
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t nl = text.find('\n', start);
        rows.push_back(text.substr(start, nl - start));
        start = nl == std::string::npos ? text.size() : nl + 1;
    }
    return rows;
}

inline json ddt_json(const DDTable& t) {
    json rows = json::array();
    for (std::uint32_t din = 0; din < t.size(); ++din) {
        json row = json::array();
        for (std::uint32_t dout = 0; dout < t.size(); ++dout) {
            row.push_back(t.at(din, dout));
        }
        rows.push_back(row);
    }
    return {{"operation", t.tag()}, {"uniformity", t.uniformity()}, {"counts", rows}};
}

inline json differential_json(const Differential& d, unsigned bits, Engine engine) {
    json j;
    j["din"] = to_hex(d.input, bits);
    j["dout"] = to_hex(d.output, bits);
    j["probability"] = d.probability;
    j["log2"] = d.probability > 0.0 ? json(std::log2(d.probability)) : json(nullptr);
    if (engine == Engine::montecarlo) {
        j["std_error"] = d.std_error;
    }
    return j;
}

inline json search_report_json(const SearchReport& r) {
    json j;
    j["engine"] = engine_name(r.engine);
    j["plus_operation"] = r.plus_tag;
    j["circ_operation"] = r.circ_tag;
    j["restriction"] = restriction_name(r.restriction);
    j["candidates"] = r.candidates;
    if (r.engine == Engine::montecarlo) {
        j["keys"] = r.keys;
        j["pairs"] = r.pairs;
        j["seed"] = r.seed;
    }
    json rows = json::array();
    for (const RoundResult& row : r.rounds) {
        rows.push_back({{"round", row.round},
                        {"plus", differential_json(row.plus, r.geometry.bits(), r.engine)},
                        {"circ", differential_json(row.circ, r.geometry.bits(), r.engine)}});
    }
    j["rounds"] = rows;
    return j;
}

inline std::string curve_csv(const SearchReport& r) {
    const unsigned bits = r.geometry.bits();
    std::string out = "round,log2_best_plus,din_plus,dout_plus,log2_best_circ,din_circ,dout_circ\n";
    for (const RoundResult& row : r.rounds) {
        out += std::to_string(row.round) + "," + format_log2(row.plus.probability) + "," +
               to_hex(row.plus.input, bits) + "," + to_hex(row.plus.output, bits) + "," +
               format_log2(row.circ.probability) + "," + to_hex(row.circ.input, bits) + "," +
               to_hex(row.circ.output, bits) + "\n";
    }
    return out;
}

inline std::string search_report_text(const SearchReport& r) {
    const unsigned bits = r.geometry.bits();
    std::string out = "engine " + std::string(engine_name(r.engine)) + ", restriction " +
                      restriction_name(r.restriction) + ", " + std::to_string(r.candidates) + " input differences\n";
    if (r.engine == Engine::montecarlo) {
        out += "keys " + std::to_string(r.keys) + ", pairs " + std::to_string(r.pairs) + ", seed " +
               std::to_string(r.seed) + "\n";
    }
    out += "round  xor: din -> dout  log2      " + r.circ_tag + ": din -> dout  log2\n";
    for (const RoundResult& row : r.rounds) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "%5u  %s -> %s  %-10s  %s -> %s  %s\n", row.round,
                      to_hex(row.plus.input, bits).c_str(), to_hex(row.plus.output, bits).c_str(),
                      format_log2(row.plus.probability).c_str(), to_hex(row.circ.input, bits).c_str(),
                      to_hex(row.circ.output, bits).c_str(), format_log2(row.circ.probability).c_str());
        out += buf;
    }
    return out;
}

inline json witness_report_json(const WitnessReport& w, bool include_matrices) {
    json j;
    j["seed"] = w.seed;
    j["budget"] = w.budget;
    j["candidates"] = w.candidates;
    j["rejected"] = w.rejected;
    j["duplicates"] = w.duplicates;
    j["verified"] = w.verified();
    j["verified_by_family"] = {{"block_diagonal", w.verified_block_diagonal},
                               {"block_permutation", w.verified_block_permutation},
                               {"product", w.verified_product},
                               {"supplied", w.verified_extra}};
    if (include_matrices) {
        json ms = json::array();
        for (const BinMatrix& m : w.witnesses) {
            ms.push_back(matrix_json(m));
        }
        j["witnesses"] = ms;
    }
    return j;
}

}  // namespace altdiff
