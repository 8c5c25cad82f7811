#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "altdiff/cipher.hpp"
#include "altdiff/difference_op.hpp"
#include "altdiff/errors.hpp"
#include "altdiff/linearity.hpp"
#include "altdiff/parallel.hpp"
#include "altdiff/rng.hpp"

namespace altdiff {

struct DiffDistribution {
    std::vector<double> probs;
    std::string tag;

    double total() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }
    double at(std::uint64_t delta) const { return probs.at(delta); }
};

struct Differential {
    std::uint64_t input = 0;
    std::uint64_t output = 0;
    double probability = 0.0;
    double std_error = 0.0;  // Monte-Carlo only

    double log2() const { return std::log2(probability); }
};

namespace detail {

constexpr double tie_tolerance = 1e-12;

// Strictly better probability, or a tie broken by the smaller (input, output).
inline bool better(double p, std::uint64_t din, std::uint64_t dout, const Differential& best) {
    const double scale = std::max(p, best.probability);
    if (p > best.probability + tie_tolerance * scale) {
        return true;
    }
    if (p + tie_tolerance * scale < best.probability || best.probability == 0.0) {
        return best.probability == 0.0 && p > 0.0;
    }
    return std::pair(din, dout) < std::pair(best.input, best.output);
}

struct SparseEntry {
    std::uint32_t column;
    double weight;
};
using SparseRows = std::vector<std::vector<SparseEntry>>;

inline SparseRows sparsify(const std::vector<double>& dense, std::uint32_t q) {
    SparseRows rows(q);
    for (std::uint32_t r = 0; r < q; ++r) {
        for (std::uint32_t c = 0; c < q; ++c) {
            if (dense[r * q + c] != 0.0) {
                rows[r].push_back({c, dense[r * q + c]});
            }
        }
    }
    return rows;
}

}  // namespace detail

// Exact expected-differential-probability propagation over independent,
// uniform round keys. One round is, in order:
//   1. s-box layer: tensor product of the per-block DDT / 2^nb matrices;
//   2. diffusion: the deterministic relabeling delta -> delta*lambda (valid
//      for o only when lambda is o-linear);
//   3. key addition: identity for XOR; for o, per block
//      delta -> delta + k.delta averaged over the uniform block key.
class MarkovModel {
public:
    static constexpr unsigned max_bits = 20;

    MarkovModel(const CipherSpec& spec, const DifferenceOperation& op) : geometry_(spec.geometry()), tag_(op.tag()) {
        if (op.geometry() != spec.geometry()) {
            throw dimension_error("operation geometry does not match the cipher");
        }
        if (geometry_.bits() > max_bits) {
            throw capacity_error("Markov engine limited to " + std::to_string(max_bits) + "-bit states");
        }
        if (op.parallel() && !is_circ_linear(spec.diffusion(), *op.parallel())) {
            throw verification_error("diffusion layer is not linear for " + op.tag() +
                                     "; o-differences would not propagate deterministically");
        }
        const std::uint32_t q = 1u << geometry_.block_bits;
        for (unsigned i = 0; i < geometry_.blocks; ++i) {
            const BlockOperation& block = op.block(i);
            const DDTable table = ddt(spec.sbox(), block);
            std::vector<double> s(q * q);
            for (std::uint32_t k = 0; k < q * q; ++k) {
                s[k] = table.counts()[k] / static_cast<double>(q);
            }
            std::vector<double> key(q * q, 0.0);
            for (std::uint32_t delta = 0; delta < q; ++delta) {
                if (block.is_xor()) {
                    key[delta * q + delta] = 1.0;
                    continue;
                }
                for (std::uint32_t k = 0; k < q; ++k) {
                    key[delta * q + (delta ^ block.dot(k, delta))] += 1.0 / q;
                }
            }
            has_key_stage_ = has_key_stage_ || !block.is_xor();
            sbox_dense_.push_back(s);
            key_dense_.push_back(key);
            sbox_rows_.push_back(detail::sparsify(s, q));
            key_rows_.push_back(detail::sparsify(key, q));
        }
        const std::size_t size = std::size_t{1} << geometry_.bits();
        permutation_.resize(size);
        const MatrixApplier apply(spec.diffusion());
        for (std::size_t delta = 0; delta < size; ++delta) {
            permutation_[delta] = static_cast<std::uint32_t>(apply(delta));
        }
    }

    const Geometry& geometry() const { return geometry_; }
    const std::string& tag() const { return tag_; }
    std::size_t size() const { return permutation_.size(); }

    // Row-stochastic 2^nb x 2^nb matrices, row = input difference.
    const std::vector<double>& sbox_matrix(unsigned block) const { return sbox_dense_.at(block); }
    const std::vector<double>& key_matrix(unsigned block) const { return key_dense_.at(block); }
    std::uint32_t diffusion_image(std::uint32_t delta) const { return permutation_.at(delta); }

    DiffDistribution point_mass(std::uint64_t delta) const {
        DiffDistribution d{std::vector<double>(size(), 0.0), tag_};
        d.probs.at(delta) = 1.0;
        return d;
    }

    void sbox_layer(std::vector<double>& v, std::vector<double>& scratch) const {
        for (unsigned i = 0; i < geometry_.blocks; ++i) {
            apply_axis(v, scratch, i, sbox_rows_[i]);
            v.swap(scratch);
        }
    }

    void diffusion_layer(std::vector<double>& v, std::vector<double>& scratch) const {
        scratch.assign(v.size(), 0.0);
        for (std::size_t delta = 0; delta < v.size(); ++delta) {
            scratch[permutation_[delta]] = v[delta];
        }
        v.swap(scratch);
    }

    void key_layer(std::vector<double>& v, std::vector<double>& scratch) const {
        if (!has_key_stage_) {
            return;
        }
        for (unsigned i = 0; i < geometry_.blocks; ++i) {
            apply_axis(v, scratch, i, key_rows_[i]);
            v.swap(scratch);
        }
    }

    void step(std::vector<double>& v, std::vector<double>& scratch) const {
        sbox_layer(v, scratch);
        diffusion_layer(v, scratch);
        key_layer(v, scratch);
    }

    DiffDistribution round_transition(const DiffDistribution& in) const {
        if (in.probs.size() != size()) {
            throw dimension_error("distribution size does not match the cipher");
        }
        if (std::abs(in.total() - 1.0) > 1e-9) {
            throw std::invalid_argument("distribution is not normalized");
        }
        DiffDistribution out = in;
        std::vector<double> scratch;
        step(out.probs, scratch);
        return out;
    }

    DiffDistribution propagate(std::uint64_t delta, unsigned rounds) const {
        DiffDistribution d = point_mass(delta);
        std::vector<double> scratch;
        for (unsigned r = 0; r < rounds; ++r) {
            step(d.probs, scratch);
        }
        return d;
    }

private:
    void apply_axis(const std::vector<double>& in, std::vector<double>& out, unsigned block,
                    const detail::SparseRows& rows) const {
        out.assign(in.size(), 0.0);
        const unsigned shift = geometry_.block_shift(block);
        const std::uint64_t mask = geometry_.block_mask();
        for (std::size_t idx = 0; idx < in.size(); ++idx) {
            const double v = in[idx];
            if (v == 0.0) {
                continue;
            }
            const std::size_t digit = (idx >> shift) & mask;
            const std::size_t base = idx - (digit << shift);
            for (const detail::SparseEntry& e : rows[digit]) {
                out[base + (static_cast<std::size_t>(e.column) << shift)] += v * e.weight;
            }
        }
    }

    Geometry geometry_;
    std::string tag_;
    bool has_key_stage_ = false;
    std::vector<std::vector<double>> sbox_dense_;
    std::vector<std::vector<double>> key_dense_;
    std::vector<detail::SparseRows> sbox_rows_;
    std::vector<detail::SparseRows> key_rows_;
    std::vector<std::uint32_t> permutation_;
};

enum class Restriction { all, single_block, list };

inline const char* restriction_name(Restriction r) {
    switch (r) {
        case Restriction::all: return "all";
        case Restriction::single_block: return "single-block";
        case Restriction::list: return "list";
    }
    return "?";
}

inline Restriction parse_restriction(const std::string& s) {
    if (s == "all") return Restriction::all;
    if (s == "single-block") return Restriction::single_block;
    if (s == "list") return Restriction::list;
    throw parse_error("unknown restriction '" + s + "' (all | single-block | list)");
}

// Candidate input differences, ascending.
inline std::vector<std::uint64_t> candidate_inputs(const Geometry& g, Restriction r,
                                                   const std::vector<std::uint64_t>& list = {}) {
    std::vector<std::uint64_t> out;
    switch (r) {
        case Restriction::all:
            if (g.bits() > 24) {
                throw capacity_error("cannot enumerate every input difference of a state this wide");
            }
            for (std::uint64_t d = 1; d <= g.mask(); ++d) {
                out.push_back(d);
            }
            break;
        case Restriction::single_block:
            for (unsigned i = 0; i < g.blocks; ++i) {
                for (std::uint64_t v = 1; v <= g.block_mask(); ++v) {
                    out.push_back(v << g.block_shift(i));
                }
            }
            break;
        case Restriction::list:
            for (std::uint64_t d : list) {
                if (d == 0 || (d & ~g.mask()) != 0) {
                    throw dimension_error("input difference " + to_hex(d, 64) + " is zero or out of range");
                }
                out.push_back(d);
            }
            if (out.empty()) {
                throw std::invalid_argument("explicit restriction needs at least one input difference");
            }
            break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Best nonzero output for each round count 1..rounds, maximized over the
// candidate inputs. Deterministic for any thread count.
inline std::vector<Differential> markov_search(const MarkovModel& model, unsigned rounds,
                                               const std::vector<std::uint64_t>& inputs, unsigned threads = 0) {
    std::vector<std::vector<Differential>> per_input(inputs.size(), std::vector<Differential>(rounds));
    parallel_for(inputs.size(), threads, [&](std::size_t c) {
        std::vector<double> v = model.point_mass(inputs[c]).probs;
        std::vector<double> scratch;
        for (unsigned r = 0; r < rounds; ++r) {
            model.step(v, scratch);
            Differential& best = per_input[c][r];
            best.input = inputs[c];
            for (std::size_t dout = 1; dout < v.size(); ++dout) {
                if (v[dout] > 0.0 && detail::better(v[dout], inputs[c], dout, best)) {
                    best.output = dout;
                    best.probability = v[dout];
                }
            }
        }
    });
    std::vector<Differential> out(rounds);
    for (unsigned r = 0; r < rounds; ++r) {
        for (const auto& cand : per_input) {
            const Differential& d = cand[r];
            if (d.probability > 0.0 && detail::better(d.probability, d.input, d.output, out[r])) {
                out[r] = d;
            }
        }
    }
    return out;
}

enum class Engine { markov, montecarlo };

inline const char* engine_name(Engine e) { return e == Engine::markov ? "markov" : "montecarlo"; }

inline Engine parse_engine(const std::string& s) {
    if (s == "markov") return Engine::markov;
    if (s == "montecarlo") return Engine::montecarlo;
    throw parse_error("unknown engine '" + s + "' (markov | montecarlo)");
}

struct RoundResult {
    unsigned round = 0;
    Differential plus;
    Differential circ;
};

struct SearchReport {
    Engine engine = Engine::markov;
    Geometry geometry;
    std::string plus_tag = "xor";
    std::string circ_tag;
    Restriction restriction = Restriction::single_block;
    std::size_t candidates = 0;
    std::vector<RoundResult> rounds;
    // Monte-Carlo metadata
    std::uint64_t keys = 0;
    std::uint64_t pairs = 0;
    std::uint64_t seed = 0;
};

struct SearchOptions {
    unsigned rounds = 17;
    Restriction restriction = Restriction::single_block;
    std::vector<std::uint64_t> inputs;  // for Restriction::list
    bool allow_long = false;            // permit the full 2^N - 1 input sweep
    unsigned threads = 0;
};

inline void check_search_budget(const SearchOptions& opts, const Geometry& g) {
    if (opts.rounds == 0) {
        throw std::invalid_argument("round count must be at least 1");
    }
    if (opts.restriction == Restriction::all && !opts.allow_long && g.bits() > 8) {
        throw capacity_error("--restrict all sweeps " + std::to_string(g.mask()) +
                             " inputs; pass the long-run flag to allow it");
    }
}

// Best +-differential and best o-differential for every round count.
inline SearchReport markov_best(const CipherSpec& spec, const DifferenceOperation& circ, const SearchOptions& opts) {
    check_search_budget(opts, spec.geometry());
    const auto inputs = candidate_inputs(spec.geometry(), opts.restriction, opts.inputs);
    const MarkovModel plus_model(spec, DifferenceOperation::xor_op(spec.geometry()));
    const MarkovModel circ_model(spec, circ);
    const auto plus = markov_search(plus_model, opts.rounds, inputs, opts.threads);
    const auto alt = markov_search(circ_model, opts.rounds, inputs, opts.threads);
    SearchReport report;
    report.engine = Engine::markov;
    report.geometry = spec.geometry();
    report.circ_tag = circ.tag();
    report.restriction = opts.restriction;
    report.candidates = inputs.size();
    for (unsigned r = 0; r < opts.rounds; ++r) {
        report.rounds.push_back({r + 1, plus[r], alt[r]});
    }
    return report;
}

struct MonteCarloOptions {
    std::uint64_t keys = 1024;
    std::uint64_t pairs = 0;  // 0 = every plaintext
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

// Key-averaged counts of output differences for a set of input differences
// under one difference operator, at a fixed round count. Counts are kept as
// integers so the result does not depend on the thread count.
class MonteCarloTally {
public:
    MonteCarloTally(Geometry g, std::vector<std::uint64_t> inputs, std::uint64_t keys, std::uint64_t pairs)
        : geometry_(g), inputs_(std::move(inputs)), keys_(keys), pairs_(pairs),
          sums_(inputs_.size() << g.bits(), 0), sumsq_(inputs_.size() << g.bits(), 0) {}

    const std::vector<std::uint64_t>& inputs() const { return inputs_; }
    std::uint64_t keys() const { return keys_; }
    std::uint64_t pairs() const { return pairs_; }
    std::size_t width() const { return std::size_t{1} << geometry_.bits(); }

    std::size_t index_of(std::uint64_t din) const {
        auto it = std::lower_bound(inputs_.begin(), inputs_.end(), din);
        if (it == inputs_.end() || *it != din) {
            throw std::out_of_range("input difference not in tally");
        }
        return static_cast<std::size_t>(it - inputs_.begin());
    }

    std::uint64_t count(std::size_t cand, std::uint64_t dout) const { return sums_[cand * width() + dout]; }

    double mean(std::size_t cand, std::uint64_t dout) const {
        return static_cast<double>(count(cand, dout)) / (static_cast<double>(keys_) * static_cast<double>(pairs_));
    }

    // Standard error of the key average, from the spread of per-key estimates.
    double std_error(std::size_t cand, std::uint64_t dout) const {
        if (keys_ < 2) {
            return 0.0;
        }
        const double k = static_cast<double>(keys_);
        const double p = static_cast<double>(pairs_);
        const double s = static_cast<double>(sums_[cand * width() + dout]) / p;
        const double ss = static_cast<double>(sumsq_[cand * width() + dout]) / (p * p);
        const double var = std::max(0.0, (ss - s * s / k) / (k - 1.0));
        return std::sqrt(var / k);
    }

    Differential estimate(std::uint64_t din, std::uint64_t dout) const {
        const std::size_t c = index_of(din);
        return {din, dout, mean(c, dout), std_error(c, dout)};
    }

    Differential best() const {
        std::size_t best_c = 0;
        std::uint64_t best_out = 0;
        std::uint64_t best_count = 0;
        for (std::size_t c = 0; c < inputs_.size(); ++c) {
            for (std::uint64_t dout = 1; dout < width(); ++dout) {
                if (count(c, dout) > best_count) {
                    best_count = count(c, dout);
                    best_c = c;
                    best_out = dout;
                }
            }
        }
        if (best_count == 0) {
            return {};
        }
        return {inputs_[best_c], best_out, mean(best_c, best_out), std_error(best_c, best_out)};
    }

    void add_key(std::size_t cand, const std::vector<std::uint32_t>& histogram) {
        std::uint64_t* sums = &sums_[cand * width()];
        std::uint64_t* sumsq = &sumsq_[cand * width()];
        for (std::size_t d = 0; d < histogram.size(); ++d) {
            const std::uint64_t h = histogram[d];
            sums[d] += h;
            sumsq[d] += h * h;
        }
    }

private:
    Geometry geometry_;
    std::vector<std::uint64_t> inputs_;
    std::uint64_t keys_;
    std::uint64_t pairs_;
    std::vector<std::uint64_t> sums_;
    std::vector<std::uint64_t> sumsq_;
};

// Fixed-key simulation averaged over sampled long keys at spec.rounds()
// rounds. Key j uses seed derive_seed(seed, j); sampled plaintexts (when
// pairs < 2^N) use derive_seed(seed, keys + j).
inline MonteCarloTally montecarlo_tally(const CipherSpec& spec, const DifferenceOperation& op,
                                        const std::vector<std::uint64_t>& inputs, const MonteCarloOptions& opts) {
    const Geometry g = spec.geometry();
    if (op.geometry() != g) {
        throw dimension_error("operation geometry does not match the cipher");
    }
    if (g.bits() > MarkovModel::max_bits) {
        throw capacity_error("Monte-Carlo engine limited to 20-bit states");
    }
    if (inputs.size() << g.bits() > (std::size_t{1} << 28)) {
        throw capacity_error("too many candidate inputs for a full output tally");
    }
    if (opts.keys == 0) {
        throw std::invalid_argument("need at least one key");
    }
    const std::uint64_t space = std::uint64_t{1} << g.bits();
    const std::uint64_t pairs = opts.pairs == 0 ? space : opts.pairs;
    if (pairs > space) {
        throw std::invalid_argument("pairs per key cannot exceed 2^N");
    }
    std::vector<std::uint64_t> sorted = inputs;
    std::sort(sorted.begin(), sorted.end());
    MonteCarloTally tally(g, sorted, opts.keys, pairs);
    const bool exhaustive = pairs == space;
    std::vector<std::uint32_t> codebook;
    std::vector<std::uint64_t> plaintexts;
    std::vector<std::vector<std::uint32_t>> histograms(sorted.size());

    for (std::uint64_t j = 0; j < opts.keys; ++j) {
        const LongKey key = keygen(spec, derive_seed(opts.seed, j));
        if (exhaustive) {
            codebook.resize(space);
            for (std::uint64_t x = 0; x < space; ++x) {
                codebook[x] = static_cast<std::uint32_t>(encrypt(spec, key, x));
            }
        } else {
            CounterRng rng(derive_seed(opts.seed, opts.keys + j));
            plaintexts.resize(pairs);
            for (auto& x : plaintexts) {
                x = rng() & g.mask();
            }
        }
        parallel_for(sorted.size(), opts.threads, [&](std::size_t c) {
            std::vector<std::uint32_t>& h = histograms[c];
            h.assign(space, 0);
            const std::uint64_t din = sorted[c];
            if (exhaustive) {
                for (std::uint64_t x = 0; x < space; ++x) {
                    ++h[op.difference(codebook[x], codebook[op.add(x, din)])];
                }
            } else {
                for (std::uint64_t x : plaintexts) {
                    ++h[op.difference(encrypt(spec, key, x), encrypt(spec, key, op.add(x, din)))];
                }
            }
            tally.add_key(c, h);
        });
    }
    return tally;
}

// Single-round-count Monte-Carlo search for + and o at opts.rounds.
inline SearchReport montecarlo_best(const CipherSpec& spec, const DifferenceOperation& circ, const SearchOptions& opts,
                                    const MonteCarloOptions& mc) {
    check_search_budget(opts, spec.geometry());
    if (circ.parallel() && !is_circ_linear(spec.diffusion(), *circ.parallel())) {
        throw verification_error("diffusion layer is not linear for " + circ.tag());
    }
    const auto inputs = candidate_inputs(spec.geometry(), opts.restriction, opts.inputs);
    const CipherSpec cipher = spec.with_rounds(opts.rounds);
    MonteCarloOptions run = mc;
    run.threads = opts.threads;
    const auto plus = montecarlo_tally(cipher, DifferenceOperation::xor_op(spec.geometry()), inputs, run);
    const auto alt = montecarlo_tally(cipher, circ, inputs, run);
    SearchReport report;
    report.engine = Engine::montecarlo;
    report.geometry = spec.geometry();
    report.circ_tag = circ.tag();
    report.restriction = opts.restriction;
    report.candidates = inputs.size();
    report.keys = mc.keys;
    report.pairs = plus.pairs();
    report.seed = mc.seed;
    report.rounds.push_back({opts.rounds, plus.best(), alt.best()});
    return report;
}

// Best-differential curve for rounds 1..opts.rounds.
inline SearchReport curve(const CipherSpec& spec, const DifferenceOperation& circ, const SearchOptions& opts,
                          Engine engine, const MonteCarloOptions& mc = {}) {
    if (engine == Engine::markov) {
        return markov_best(spec, circ, opts);
    }
    SearchReport report;
    for (unsigned r = 1; r <= opts.rounds; ++r) {
        SearchOptions one = opts;
        one.rounds = r;
        SearchReport step = montecarlo_best(spec, circ, one, mc);
        if (r == 1) {
            report = step;
            report.rounds.clear();
        }
        report.rounds.push_back(step.rounds.front());
    }
    return report;
}

}  // namespace altdiff
