#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "altdiff/analysis.hpp"
#include "altdiff/report.hpp"
#include "reference_tables.hpp"

using namespace altdiff;

namespace {

const CipherSpec& spec16() {
    static const CipherSpec spec = toy16_cipher();
    return spec;
}

DifferenceOperation circ16() { return parse_operation("circ:4:01", spec16().geometry()); }
DifferenceOperation xor16() { return DifferenceOperation::xor_op(spec16().geometry()); }

// Key-error probability for one block, straight from the dot product.
double key_error(const AltOperation& op, std::uint32_t from, std::uint32_t to) {
    int hits = 0;
    for (std::uint32_t k = 0; k < 16; ++k) {
        hits += (from ^ op.dot(k, from)) == to;
    }
    return hits / 16.0;
}

// Exact probability that a fixed key maps din to dout, by counting.
double fixed_key_probability(const CipherSpec& spec, const LongKey& key, const DifferenceOperation& op,
                             std::uint64_t din, std::uint64_t dout) {
    std::uint64_t hits = 0;
    for (std::uint64_t x = 0; x < (1u << 16); ++x) {
        hits += op.difference(encrypt(spec, key, x), encrypt(spec, key, op.add(x, din))) == dout;
    }
    return hits / 65536.0;
}

}  // namespace

TEST(Markov, ZeroDifferenceIsFixed) {
    for (const auto& op : {xor16(), circ16()}) {
        const MarkovModel model(spec16(), op);
        const DiffDistribution d = model.propagate(0, 17);
        EXPECT_DOUBLE_EQ(d.at(0), 1.0);
        EXPECT_NEAR(d.total(), 1.0, 1e-12);
    }
}

TEST(Markov, NormalizedEveryRound) {
    for (const auto& op : {xor16(), circ16()}) {
        const MarkovModel model(spec16(), op);
        for (std::uint64_t din : {0x0007ull, 0x0060ull, 0x8421ull}) {
            DiffDistribution d = model.point_mass(din);
            for (int r = 0; r < 17; ++r) {
                d = model.round_transition(d);
                ASSERT_NEAR(d.total(), 1.0, 1e-9);
                for (double p : d.probs) ASSERT_GE(p, 0.0);
            }
        }
    }
}

TEST(Markov, RejectsUnnormalizedInput) {
    const MarkovModel model(spec16(), xor16());
    DiffDistribution d = model.point_mass(1);
    d.probs[2] = 0.5;
    EXPECT_THROW(model.round_transition(d), std::invalid_argument);
}

TEST(Markov, PlusSboxLayerSupportFollowsDdtRow) {
    const MarkovModel model(spec16(), xor16());
    std::vector<double> v = model.point_mass(0x0007).probs, scratch;
    model.sbox_layer(v, scratch);
    for (std::uint64_t delta = 0; delta < v.size(); ++delta) {
        const bool allowed = (delta >> 4) == 0 && fixtures::ddt_plus[7][delta & 0xF] != 0;
        ASSERT_EQ(v[delta] > 0, allowed) << delta;
        if (allowed) {
            ASSERT_DOUBLE_EQ(v[delta], fixtures::ddt_plus[7][delta] / 16.0);
        }
    }
}

TEST(Markov, CircSboxLayerIsDeterministicOnSeven) {
    const MarkovModel model(spec16(), circ16());
    std::vector<double> v = model.point_mass(0x0007).probs, scratch;
    model.sbox_layer(v, scratch);
    EXPECT_DOUBLE_EQ(v[0x0006], 1.0);
}

TEST(Markov, PlusNeverMixesZeroAndNonzero) {
    const MarkovModel model(spec16(), xor16());
    std::mt19937_64 rng(41);
    for (int t = 0; t < 10; ++t) {
        const std::uint64_t din = 1 + rng() % 0xFFFF;
        DiffDistribution d = model.point_mass(din);
        for (int r = 0; r < 4; ++r) {
            d = model.round_transition(d);
            ASSERT_EQ(d.at(0), 0.0);
        }
    }
}

TEST(Markov, KeyErrorMatrixDoublyStochasticAndIdentityOnWeak) {
    const MarkovModel model(spec16(), circ16());
    const AltOperation op(4, 1);
    for (unsigned block = 0; block < 4; ++block) {
        const auto& q = model.key_matrix(block);
        for (std::uint32_t r = 0; r < 16; ++r) {
            double row = 0, col = 0;
            for (std::uint32_t c = 0; c < 16; ++c) {
                row += q[r * 16 + c];
                col += q[c * 16 + r];
                ASSERT_DOUBLE_EQ(q[r * 16 + c], key_error(op, r, c));
            }
            ASSERT_DOUBLE_EQ(row, 1.0);
            ASSERT_DOUBLE_EQ(col, 1.0);
            if (r < 4) {
                ASSERT_DOUBLE_EQ(q[r * 16 + r], 1.0);
            }
        }
    }
    const MarkovModel plus(spec16(), xor16());
    for (std::uint32_t r = 0; r < 16; ++r) {
        EXPECT_DOUBLE_EQ(plus.key_matrix(0)[r * 16 + r], 1.0);
    }
}

TEST(Markov, SingleRoundSingleBlockMatchesHandProducts) {
    const AltOperation op(4, 1);
    const MarkovModel model(spec16(), circ16());
    const MatrixApplier lambda(spec16().diffusion());
    double q[16][16];
    for (std::uint32_t a = 0; a < 16; ++a)
        for (std::uint32_t c = 0; c < 16; ++c) q[a][c] = key_error(op, a, c);
    for (unsigned block = 0; block < 4; ++block) {
        const unsigned shift = 12 - 4 * block;
        for (std::uint32_t d = 1; d < 16; ++d) {
            const DiffDistribution got = model.propagate(std::uint64_t{d} << shift, 1);
            std::vector<double> want(1u << 16, 0.0);
            for (std::uint32_t s = 0; s < 16; ++s) {
                const double ps = fixtures::ddt_circ[d][s] / 16.0;
                if (ps == 0) continue;
                const std::uint64_t mid = lambda(std::uint64_t{s} << shift);
                for (std::uint64_t out = 0; out < want.size(); ++out) {
                    double p = ps;
                    for (unsigned j = 0; j < 4 && p > 0; ++j) {
                        const unsigned sh = 12 - 4 * j;
                        p *= q[(mid >> sh) & 0xF][(out >> sh) & 0xF];
                    }
                    want[out] += p;
                }
            }
            for (std::uint64_t out = 0; out < want.size(); ++out) {
                ASSERT_NEAR(got.at(out), want[out], 1e-15) << block << " " << d << " " << out;
            }
        }
    }
}

TEST(Markov, OneRoundPlusBestForThree) {
    const MarkovModel model(spec16(), xor16());
    const auto best = markov_search(model, 1, {0x0003});
    EXPECT_DOUBLE_EQ(best[0].probability, 4.0 / 16.0);
}

TEST(Markov, DeterministicAcrossThreadCounts) {
    SearchOptions one;
    one.rounds = 6;
    one.threads = 1;
    SearchOptions many = one;
    many.threads = 4;
    const SearchReport a = markov_best(spec16(), circ16(), one);
    const SearchReport b = markov_best(spec16(), circ16(), many);
    EXPECT_EQ(curve_csv(a), curve_csv(b));
}

TEST(Markov, CircDominatesPlusOnShortCurve) {
    SearchOptions o;
    o.rounds = 8;
    const SearchReport r = markov_best(spec16(), circ16(), o);
    ASSERT_EQ(r.rounds.size(), 8u);
    EXPECT_EQ(r.candidates, 60u);
    for (const RoundResult& row : r.rounds) {
        EXPECT_GE(row.circ.probability, row.plus.probability) << row.round;
        EXPECT_NE(row.circ.input, 0u);
        EXPECT_NE(row.circ.output, 0u);
        EXPECT_GT(row.plus.probability, 0.0);
        EXPECT_LE(row.plus.probability, 1.0);
    }
    EXPECT_GT(std::log2(r.rounds[0].circ.probability), -4.0);
}

TEST(Markov, TieBreakPrefersSmallestPair) {
    Differential best{0x0100, 0x0002, 0.25, 0};
    EXPECT_TRUE(detail::better(0.25, 0x0010, 0x0009, best));
    EXPECT_FALSE(detail::better(0.25, 0x0100, 0x0003, best));
    EXPECT_TRUE(detail::better(0.25 * (1 + 1e-9), 0x0200, 0x0000, best));
    EXPECT_FALSE(detail::better(0.25 * (1 - 1e-9), 0x0001, 0x0001, best));
}

TEST(Markov, RefusesDiffusionOutsideHCirc) {
    std::mt19937_64 rng(42);
    BinMatrix m;
    do {
        std::vector<std::uint64_t> rows(16);
        for (auto& r : rows) r = rng() & 0xFFFF;
        m = BinMatrix::from_rows(16, rows);
    } while (!m.is_invertible());
    const CipherSpec spec(Geometry{4, 4}, spec16().sbox(), m, 5);
    EXPECT_THROW(MarkovModel(spec, circ16()), verification_error);
    EXPECT_NO_THROW(MarkovModel(spec, xor16()));
}

TEST(Search, CandidateInputsAndBudget) {
    const Geometry g{4, 4};
    const auto single = candidate_inputs(g, Restriction::single_block);
    EXPECT_EQ(single.size(), 60u);
    EXPECT_TRUE(std::is_sorted(single.begin(), single.end()));
    EXPECT_EQ(candidate_inputs(g, Restriction::all).size(), 65535u);
    EXPECT_EQ(candidate_inputs(g, Restriction::list, {0x60, 0x70, 0x60}).size(), 2u);
    EXPECT_THROW(candidate_inputs(g, Restriction::list, {0}), dimension_error);
    SearchOptions o;
    o.restriction = Restriction::all;
    EXPECT_THROW(markov_best(spec16(), circ16(), o), capacity_error);
    o.rounds = 0;
    o.restriction = Restriction::single_block;
    EXPECT_THROW(markov_best(spec16(), circ16(), o), std::invalid_argument);
}

TEST(MonteCarlo, SingleKeyExhaustiveIsExactCount) {
    const CipherSpec spec = toy16_cipher(3);
    MonteCarloOptions mc;
    mc.keys = 1;
    mc.seed = 99;
    const std::vector<std::uint64_t> inputs{0x0007, 0x0700};
    for (const auto& op : {xor16(), circ16()}) {
        const MonteCarloTally t = montecarlo_tally(spec, op, inputs, mc);
        const LongKey key = keygen(spec, derive_seed(99, 0));
        for (std::uint64_t din : inputs) {
            for (std::uint64_t dout : {0x0006ull, 0x2212ull, 0x0600ull}) {
                EXPECT_DOUBLE_EQ(t.estimate(din, dout).probability,
                                 fixed_key_probability(spec, key, op, din, dout));
            }
        }
        EXPECT_EQ(t.estimate(0x0007, 0x0006).std_error, 0.0);
    }
}

TEST(MonteCarlo, ZeroDifferenceHasProbabilityOne) {
    const CipherSpec spec = toy16_cipher(4);
    MonteCarloOptions mc;
    mc.keys = 3;
    const MonteCarloTally t = montecarlo_tally(spec, circ16(), {0}, mc);
    EXPECT_DOUBLE_EQ(t.estimate(0, 0).probability, 1.0);
}

TEST(MonteCarlo, OneRoundPlusIsKeyIndependent) {
    const CipherSpec spec = toy16_cipher(1);
    const MarkovModel model(spec, xor16());
    MonteCarloOptions mc;
    mc.keys = 2;
    mc.seed = 5;
    const MonteCarloTally t = montecarlo_tally(spec, xor16(), {0x0003, 0x0B00}, mc);
    for (std::uint64_t din : {0x0003ull, 0x0B00ull}) {
        const DiffDistribution d = model.propagate(din, 1);
        for (std::uint64_t dout = 0; dout < d.probs.size(); ++dout) {
            ASSERT_DOUBLE_EQ(t.estimate(din, dout).probability, d.at(dout));
        }
    }
}

TEST(MonteCarlo, AgreesWithMarkovOnTwoRounds) {
    const CipherSpec spec = toy16_cipher(2);
    const MarkovModel model(spec, circ16());
    MonteCarloOptions mc;
    mc.keys = 64;
    mc.seed = 2024;
    const MonteCarloTally t = montecarlo_tally(spec, circ16(), {0x0007}, mc);
    const DiffDistribution d = model.propagate(0x0007, 2);
    for (std::uint64_t dout : {0x0600ull, 0x0601ull, 0x2122ull}) {
        const Differential e = t.estimate(0x0007, dout);
        EXPECT_LE(std::abs(e.probability - d.at(dout)), 4 * e.std_error + 1e-12) << dout;
    }
}

TEST(MonteCarlo, DeterministicGivenSeedAndThreadIndependent) {
    SearchOptions o;
    o.rounds = 3;
    o.restriction = Restriction::list;
    o.inputs = {0x0007, 0x0060, 0x1000};
    MonteCarloOptions mc;
    mc.keys = 4;
    mc.seed = 77;
    o.threads = 1;
    const SearchReport a = montecarlo_best(spec16(), circ16(), o, mc);
    o.threads = 3;
    const SearchReport b = montecarlo_best(spec16(), circ16(), o, mc);
    EXPECT_EQ(search_report_json(a).dump(), search_report_json(b).dump());
    EXPECT_EQ(a.seed, 77u);
    EXPECT_EQ(a.pairs, 65536u);
}

TEST(MonteCarlo, SampledPairsPath) {
    const CipherSpec spec = toy16_cipher(1);
    MonteCarloOptions mc;
    mc.keys = 2;
    mc.pairs = 4096;
    const MonteCarloTally t = montecarlo_tally(spec, xor16(), {0x0003}, mc);
    EXPECT_EQ(t.pairs(), 4096u);
    const MarkovModel model(spec, xor16());
    const Differential best = t.best();
    EXPECT_NEAR(best.probability, model.propagate(0x0003, 1).at(best.output), 0.05);
    mc.pairs = 1u << 17;
    EXPECT_THROW(montecarlo_tally(spec, xor16(), {0x0003}, mc), std::invalid_argument);
}

TEST(Curve, CsvSchema) {
    SearchOptions o;
    o.rounds = 2;
    const std::string csv = curve_csv(curve(spec16(), circ16(), o, Engine::markov));
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "round,log2_best_plus,din_plus,dout_plus,log2_best_circ,din_circ,dout_circ");
    EXPECT_NE(csv.find("\n1,-2.000000,0001,00E0,-1.000000,0007,0060\n"), std::string::npos);
}
