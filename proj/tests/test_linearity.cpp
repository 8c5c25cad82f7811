#include <gtest/gtest.h>

#include <random>
#include <set>
#include <unordered_set>

#include "altdiff/cipher.hpp"
#include "altdiff/linearity.hpp"

using namespace altdiff;

namespace {

// Definition-level check over every pair, with no basis shortcut.
bool pairwise_linear(const BinMatrix& m, const AltOperation& op) {
    if (!m.is_invertible()) return false;
    for (std::uint64_t x = 0; x < op.size(); ++x) {
        for (std::uint64_t y = 0; y < op.size(); ++y) {
            if (m.apply(op.add(x, y)) != op.add(m.apply(x), m.apply(y))) return false;
        }
    }
    return true;
}

std::unordered_set<BinMatrix, BinMatrixHash> as_set(const std::vector<BinMatrix>& v) { return {v.begin(), v.end()}; }

BinMatrix random_invertible(unsigned n, std::mt19937_64& rng) {
    while (true) {
        std::vector<std::uint64_t> rows(n);
        for (auto& r : rows) r = rng() & low_mask(n);
        BinMatrix m = BinMatrix::from_rows(n, rows);
        if (m.is_invertible()) return m;
    }
}

}  // namespace

TEST(Linearity, IdentityAndDimensionErrors) {
    const AltOperation op(4, 1);
    EXPECT_TRUE(is_circ_linear(BinMatrix::identity(4), op));
    EXPECT_FALSE(is_circ_linear(BinMatrix::zero(4, 4), op));
    EXPECT_THROW(is_circ_linear(BinMatrix::identity(5), op), dimension_error);
    EXPECT_THROW(is_circ_linear(BinMatrix::zero(4, 5), op), dimension_error);
}

TEST(Linearity, GeneralLinearGroupOrders) {
    EXPECT_EQ(general_linear_group(2).size(), 6u);
    EXPECT_EQ(general_linear_group(3).size(), 168u);
    EXPECT_EQ(general_linear_group(4).size(), 20160u);
}

class HCircSmall : public ::testing::TestWithParam<std::pair<unsigned, std::uint64_t>> {};

TEST_P(HCircSmall, BasisCheckPairwiseOracleAndStructureAgree) {
    const auto [n, b] = GetParam();
    const AltOperation op(n, b);
    std::size_t members = 0;
    for (const BinMatrix& m : general_linear_group(n)) {
        const bool basis = is_circ_linear(m, op);
        ASSERT_EQ(basis, pairwise_linear(m, op));
        ASSERT_EQ(basis, is_circ_linear(m, op, EvalPath::composition));
        ASSERT_EQ(basis, structure_check(m, op).has_value());
        members += basis;
    }
    const std::size_t expected = n == 3 ? 24 : 192;
    EXPECT_EQ(members, expected);
}

INSTANTIATE_TEST_SUITE_P(Blocks, HCircSmall,
                         ::testing::Values(std::pair{3u, std::uint64_t{1}}, std::pair{4u, std::uint64_t{1}},
                                           std::pair{4u, std::uint64_t{2}}, std::pair{4u, std::uint64_t{3}}));

TEST(Linearity, ParametrizedEnumerationMatchesBruteForce) {
    for (auto [n, b] : {std::pair{3u, 1ull}, std::pair{4u, 1ull}, std::pair{4u, 3ull}}) {
        const AltOperation op(n, b);
        const auto enumerated = enumerate_hcirc(op);
        const auto brute = brute_force_hcirc(op, 2);
        EXPECT_EQ(enumerated.size(), n == 3 ? 24u : 192u);
        EXPECT_EQ(as_set(enumerated).size(), enumerated.size());
        EXPECT_EQ(as_set(enumerated), as_set(brute));
    }
}

TEST(Linearity, EnumerationIsAGroup) {
    for (unsigned n : {3u, 4u}) {
        const AltOperation op(n, 1);
        const auto h = enumerate_hcirc(op);
        const auto members = as_set(h);
        for (const BinMatrix& a : h) {
            ASSERT_TRUE(members.count(*a.inverse()));
            for (const BinMatrix& c : h) {
                ASSERT_TRUE(members.count(a * c));
            }
        }
    }
}

TEST(Linearity, FiveBitEnumerationVerifies) {
    const AltOperation op(5, 0x5);
    const auto h = enumerate_hcirc(op);
    // 6 choices of A, 2^(2d) of B, and the stabilizer of b in GL(3,2) of order 24.
    EXPECT_EQ(h.size(), 6u * 64u * 24u);
    for (std::size_t i = 0; i < h.size(); i += 97) {
        ASSERT_TRUE(pairwise_linear(h[i], op));
    }
}

TEST(Linearity, DiffusionLayerIsLinearForParallelOperation) {
    const BinMatrix lambda = BinMatrix::parse(toy16_diffusion_text());
    const auto op = ParallelOperation::uniform(AltOperation(4, 1), 4);
    EXPECT_TRUE(is_circ_linear(lambda, op));
    EXPECT_TRUE(is_circ_linear(lambda, op, EvalPath::composition));
}

TEST(Linearity, RandomInvertibleWordMatricesAreRejected) {
    std::mt19937_64 rng(21);
    const auto op = ParallelOperation::uniform(AltOperation(4, 1), 4);
    for (int t = 0; t < 20; ++t) {
        EXPECT_FALSE(is_circ_linear(random_invertible(16, rng), op));
    }
}

TEST(Linearity, ConjectureBoundExactValues) {
    EXPECT_EQ(conjecture_bound(4, 4), BigInt(13860864));
    EXPECT_EQ(conjecture_bound(3, 2), BigInt(384));
    EXPECT_EQ(conjecture_bound(4, 1), BigInt(-192));
    EXPECT_FALSE(conjecture_applies(1));
    EXPECT_TRUE(conjecture_applies(4));
    // Independent evaluation for n=5, m=3: 27*6*3*2^9*(4-1)(4-2)*(6*2^6-1).
    EXPECT_EQ(conjecture_bound(5, 3), BigInt(27) * 6 * 3 * 512 * 3 * 2 * (6 * 64 - 1));
}

TEST(Linearity, BlockRotationAndDiagonalWitnesses) {
    const AltOperation block(4, 1);
    const auto op = ParallelOperation::uniform(block, 4);
    EXPECT_TRUE(is_circ_linear(block_permutation_matrix({1, 2, 3, 0}, 4), op));
    const auto h = enumerate_hcirc(block);
    EXPECT_TRUE(is_circ_linear(block_diagonal({h[3], h[50], h[101], h[191]}), op));
    // Mixed defining vectors break permutation equivariance.
    const auto mixed = parse_parallel_descriptor("circ:4:01,02,01,02");
    EXPECT_FALSE(is_circ_linear(block_permutation_matrix({1, 0, 2, 3}, 4), mixed));
}

TEST(Linearity, WitnessesReverifyAndAreDeterministic) {
    const auto op = ParallelOperation::uniform(AltOperation(4, 1), 4);
    const BinMatrix lambda = BinMatrix::parse(toy16_diffusion_text());
    const WitnessReport a = parallel_hcirc_witnesses(op, 300, 42, {lambda}, 1);
    const WitnessReport b = parallel_hcirc_witnesses(op, 300, 42, {lambda}, 3);
    ASSERT_EQ(a.witnesses, b.witnesses);
    EXPECT_EQ(a.candidates, 300u);
    EXPECT_EQ(a.candidates, a.verified() + a.rejected + a.duplicates);
    EXPECT_EQ(a.verified_extra, 1u);
    EXPECT_GT(a.verified_block_diagonal, 0u);
    EXPECT_GT(a.verified_block_permutation, 0u);
    EXPECT_GT(a.verified_product, 0u);
    EXPECT_EQ(as_set(a.witnesses).size(), a.witnesses.size());
    for (const BinMatrix& w : a.witnesses) {
        ASSERT_TRUE(is_circ_linear(w, op, EvalPath::composition));
    }
}
