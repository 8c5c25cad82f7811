#include <gtest/gtest.h>

#include <random>
#include <set>

#include "altdiff/altop.hpp"
#include "altdiff/difference_op.hpp"
#include "reference_tables.hpp"

using namespace altdiff;

namespace {

// Closed form for d = n-2: a o c = a + c + s(a, c) b, where s is the
// symplectic form on the two leading coordinates and b fills the trailing
// n-2 coordinates. Derived independently of the tau-matrix construction.
std::uint64_t closed_form(unsigned n, std::uint64_t b, std::uint64_t a, std::uint64_t c) {
    const unsigned a1 = (a >> (n - 1)) & 1, a2 = (a >> (n - 2)) & 1;
    const unsigned c1 = (c >> (n - 1)) & 1, c2 = (c >> (n - 2)) & 1;
    return a ^ c ^ (((a1 & c2) ^ (a2 & c1)) ? b : 0);
}

// Weak keys by definition: k with x + k = x o k for every x.
std::set<std::uint64_t> scan_weak_keys(const AltOperation& op) {
    std::set<std::uint64_t> weak;
    for (std::uint64_t k = 0; k < op.size(); ++k) {
        bool ok = true;
        for (std::uint64_t x = 0; x < op.size() && ok; ++x) {
            ok = op.add(x, k) == (x ^ k);
        }
        if (ok) weak.insert(k);
    }
    return weak;
}

std::set<std::uint64_t> scan_errors(const AltOperation& op) {
    std::set<std::uint64_t> errors;
    for (std::uint64_t a = 0; a < op.size(); ++a) {
        for (std::uint64_t c = 0; c < op.size(); ++c) {
            errors.insert(a ^ c ^ op.add(a, c));
        }
    }
    return errors;
}

std::set<std::uint64_t> as_set(const std::vector<std::uint64_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(AltOperation, CayleyTableMatchesReference) {
    const AltOperation op(4, 0x1);
    for (std::uint32_t a = 0; a < 16; ++a) {
        for (std::uint32_t c = 0; c < 16; ++c) {
            ASSERT_EQ(op.add(a, c), fixtures::cayley_circ4_b01[a][c]) << a << "," << c;
        }
    }
    EXPECT_EQ(op.add(0x4, 0x8), 0xDu);
    EXPECT_EQ(op.add(0x4, 0xC), 0x9u);
}

TEST(AltOperation, TableAndCompositionAgreeWithClosedForm) {
    for (unsigned n = 3; n <= 8; ++n) {
        for (std::uint64_t b = 1; b < (1u << (n - 2)); ++b) {
            const AltOperation op(n, b);
            for (std::uint64_t a = 0; a < op.size(); ++a) {
                for (std::uint64_t c = 0; c < op.size(); ++c) {
                    ASSERT_EQ(op.add(a, c), closed_form(n, b, a, c));
                    ASSERT_EQ(op.add_by_composition(a, c), closed_form(n, b, a, c));
                }
            }
        }
    }
}

TEST(AltOperation, WideBlocksUseComposition) {
    std::mt19937_64 rng(11);
    const AltOperation op(20, 0x2B3C1);
    EXPECT_FALSE(op.has_tables());
    for (int k = 0; k < 10000; ++k) {
        const std::uint64_t a = rng() & 0xFFFFF, c = rng() & 0xFFFFF;
        ASSERT_EQ(op.add(a, c), closed_form(20, 0x2B3C1, a, c));
    }
}

TEST(AltOperation, GroupAxiomsExhaustive) {
    const AltOperation op(4, 0x1);
    for (std::uint64_t x = 0; x < 16; ++x) {
        ASSERT_EQ(op.add(x, 0), x);
        ASSERT_EQ(op.add(x, x), 0u);
        for (std::uint64_t y = 0; y < 16; ++y) {
            ASSERT_EQ(op.add(x, y), op.add(y, x));
            for (std::uint64_t z = 0; z < 16; ++z) {
                ASSERT_EQ(op.add(op.add(x, y), z), op.add(x, op.add(y, z)));
            }
        }
    }
}

TEST(AltOperation, DotSymmetricAndBilinear) {
    const AltOperation op(4, 0x1);
    for (std::uint64_t a = 0; a < 16; ++a) {
        ASSERT_EQ(op.dot(a, 0), 0u);
        for (std::uint64_t b = 0; b < 16; ++b) {
            ASSERT_EQ(op.dot(a, b), op.dot(b, a));
            for (std::uint64_t c = 0; c < 16; ++c) {
                ASSERT_EQ(op.dot(a ^ b, c), op.dot(a, c) ^ op.dot(b, c));
            }
        }
    }
}

TEST(AltOperation, WeakKeysAndErrors) {
    const AltOperation op4(4, 0x1);
    EXPECT_EQ(as_set(op4.weak_keys()), (std::set<std::uint64_t>{0, 1, 2, 3}));
    EXPECT_EQ(as_set(op4.error_set()), (std::set<std::uint64_t>{0, 1}));
    const AltOperation op3(3, 0x1);
    EXPECT_EQ(as_set(op3.weak_keys()), (std::set<std::uint64_t>{0, 1}));
    EXPECT_EQ(as_set(op3.error_set()), (std::set<std::uint64_t>{0, 1}));
}

TEST(AltOperation, WeakSpaceMatchesScanAndContainsErrors) {
    for (unsigned n = 3; n <= 7; ++n) {
        for (std::uint64_t b = 1; b < (1u << (n - 2)); ++b) {
            const AltOperation op(n, b);
            const auto weak = as_set(op.weak_keys());
            ASSERT_EQ(weak, scan_weak_keys(op));
            ASSERT_EQ(weak.size(), std::size_t{1} << op.weak_dimension());
            ASSERT_GE(op.weak_dimension(), 1u);
            const auto errors = scan_errors(op);
            ASSERT_EQ(as_set(op.error_set()), errors);
            ASSERT_TRUE(errors.count(0));
            for (std::uint64_t e : errors) {
                ASSERT_TRUE(weak.count(e));
                ASSERT_TRUE(op.is_weak(e));
            }
        }
    }
}

TEST(AltOperation, KeyDifferenceIdentityExhaustiveOnBlock) {
    const AltOperation op(4, 0x1);
    for (std::uint64_t x = 0; x < 16; ++x) {
        for (std::uint64_t k = 0; k < 16; ++k) {
            for (std::uint64_t delta = 0; delta < 16; ++delta) {
                const std::uint64_t direct = op.add(x ^ k, op.add(x, delta) ^ k);
                ASSERT_EQ(direct, op.key_diff_transition(delta, k));
            }
        }
    }
    EXPECT_EQ(op.key_diff_transition(0x7, 0x8), 0x7 ^ op.dot(0x8, 0x7));
    EXPECT_EQ(op.key_diff_transition(0x7, 0x8), 0x6u);
    for (std::uint64_t k : op.weak_keys()) {
        for (std::uint64_t delta = 0; delta < 16; ++delta) {
            ASSERT_EQ(op.key_diff_transition(delta, k), delta);
        }
    }
    EXPECT_EQ(op.key_diff_transition(0, 0xF), 0u);
}

TEST(AltOperation, RestrictionLawOnWeakArguments) {
    const AltOperation op(4, 0x1);
    for (std::uint64_t a = 0; a < 16; ++a) {
        for (std::uint64_t c = 0; c < 4; ++c) {
            ASSERT_EQ(op.add(a, c), a ^ c);
            ASSERT_EQ(op.add(c, a), a ^ c);
        }
    }
}

TEST(AltOperation, ConstructionErrors) {
    EXPECT_THROW(AltOperation(4, 0), degenerate_operation_error);
    EXPECT_THROW(AltOperation(4, 0x4), dimension_error);
    EXPECT_THROW(AltOperation(2, 0x1), dimension_error);
    EXPECT_THROW(AltOperation::make(4, BitWord(1, 3)), dimension_error);
    EXPECT_EQ(AltOperation::make(4, BitWord(1, 2)), AltOperation(4, 1));
}

TEST(AltOperation, TauMatricesAreInvolutions) {
    const AltOperation op(6, 0xB);
    for (unsigned i = 1; i <= 2; ++i) {
        const BinMatrix t = op.tau_matrix(i);
        EXPECT_EQ(t * t, BinMatrix::identity(6));
        EXPECT_NE(t, BinMatrix::identity(6));
    }
    EXPECT_EQ(op.tau_matrix(3), BinMatrix::identity(6));
}

TEST(ParallelOperation, BlockwiseSum) {
    const ParallelOperation p = ParallelOperation::uniform(AltOperation(4, 1), 4);
    EXPECT_EQ(p.add(0x4444, 0x8888), 0xDDDDu);
    for (std::uint64_t x : {0x0u, 0x1234u, 0xFFFFu}) {
        EXPECT_EQ(p.add(x, 0), x);
    }
    std::mt19937_64 rng(12);
    for (int k = 0; k < 10000; ++k) {
        const std::uint64_t a = rng() & 0xFFFF, c = rng() & 0xFFFF;
        std::uint64_t expect = 0;
        for (unsigned i = 0; i < 4; ++i) {
            const unsigned s = 12 - 4 * i;
            expect |= closed_form(4, 1, (a >> s) & 0xF, (c >> s) & 0xF) << s;
        }
        ASSERT_EQ(p.add(a, c), expect);
        ASSERT_EQ(p.add_by_composition(a, c), expect);
    }
}

TEST(ParallelOperation, KeyDifferenceIdentityRandomWords) {
    const ParallelOperation p = ParallelOperation::uniform(AltOperation(4, 1), 4);
    std::mt19937_64 rng(13);
    for (int t = 0; t < 10000; ++t) {
        const std::uint64_t x = rng() & 0xFFFF, k = rng() & 0xFFFF, delta = rng() & 0xFFFF;
        ASSERT_EQ(p.add(x ^ k, p.add(x, delta) ^ k), p.key_diff_transition(delta, k));
    }
}

TEST(ParallelOperation, WeakKeysAndErrorsAreProducts) {
    const ParallelOperation p = ParallelOperation::uniform(AltOperation(4, 1), 4);
    const auto weak = p.weak_keys();
    EXPECT_EQ(weak.size(), 256u);
    for (std::uint64_t k : weak) {
        for (unsigned i = 0; i < 4; ++i) {
            ASSERT_LE((k >> (12 - 4 * i)) & 0xF, 3u);
        }
        ASSERT_TRUE(p.is_weak(k));
    }
    EXPECT_EQ(p.error_set().size(), 16u);
}

TEST(ParallelOperation, MixedDefiningVectors) {
    const ParallelOperation p = parse_parallel_descriptor("circ:4:01,02,03,01");
    EXPECT_EQ(p.block_count(), 4u);
    EXPECT_EQ(p.descriptor(), "circ:4:01,02,03,01");
    const AltOperation b2(4, 2);
    EXPECT_EQ(p.add(0x0400, 0x0800), static_cast<std::uint64_t>(b2.add(4, 8)) << 8);
}

TEST(ParallelOperation, RejectsBadInputs) {
    EXPECT_THROW(ParallelOperation(std::vector<AltOperation>{}), std::invalid_argument);
    EXPECT_THROW(ParallelOperation({AltOperation(4, 1), AltOperation(3, 1)}), dimension_error);
    EXPECT_THROW(parse_parallel_descriptor("circ:4:01,01", 4), dimension_error);
    EXPECT_THROW(parse_parallel_descriptor("circ:4:00", 4), degenerate_operation_error);
    EXPECT_THROW(parse_parallel_descriptor("xor:4:01"), parse_error);
    EXPECT_THROW(parse_parallel_descriptor("circ:4:zz"), parse_error);
}

TEST(ParallelOperation, DescriptorAndFileRoundTrip) {
    const ParallelOperation p = parse_parallel_descriptor("circ:4:1", 4);
    EXPECT_EQ(p.descriptor(), "circ:4:01,01,01,01");
    const ParallelOperation q = parse_operation_file_text(operation_file_text(p));
    EXPECT_EQ(q.descriptor(), p.descriptor());
    EXPECT_EQ(parse_operation_file_text("# op\nn 4\nm 4\nb 01\n").descriptor(), p.descriptor());
    EXPECT_THROW(parse_operation_file_text("n 4\n"), parse_error);
}

TEST(DifferenceOperation, XorAndCircAgreeOnBlocks) {
    const Geometry g{4, 4};
    const DifferenceOperation x = parse_operation("xor", g);
    const DifferenceOperation c = parse_operation("circ:4:01", g);
    EXPECT_TRUE(x.is_xor());
    EXPECT_FALSE(c.is_xor());
    EXPECT_EQ(x.add(0x4444, 0x8888), 0xCCCCu);
    EXPECT_EQ(c.add(0x4444, 0x8888), 0xDDDDu);
    EXPECT_EQ(c.tag(), "circ:4:01,01,01,01");
    EXPECT_THROW(parse_operation("circ:3:01", g), dimension_error);
}
