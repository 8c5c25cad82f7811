#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <unordered_set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "altdiff/altop.hpp"
#include "altdiff/binmatrix.hpp"
#include "altdiff/errors.hpp"
#include "altdiff/parallel.hpp"
#include "altdiff/rng.hpp"

namespace altdiff {

// Which evaluation of o the linearity check uses: the precomputed Cayley
// tables or a fresh composition of translation matrices.
enum class EvalPath { table, composition };

// M lies in H_o = GL(V,+) ∩ GL(V,o) iff M is invertible and
// (x o e)M = xM o eM for every x and every basis vector e. The standard basis
// is also a basis of (V, o), so additivity on it extends to all of V.
inline bool is_circ_linear(const BinMatrix& m, const ParallelOperation& op, EvalPath path = EvalPath::table) {
    const unsigned n = op.bits();
    if (!m.is_square() || m.rows() != n) {
        throw dimension_error("matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                              ", operation acts on " + std::to_string(n) + " bits");
    }
    if (n > 24) {
        throw capacity_error("exhaustive linearity check limited to 24-bit states");
    }
    if (!m.is_invertible()) {
        return false;
    }
    auto add = [&](std::uint64_t a, std::uint64_t c) {
        return path == EvalPath::table ? op.add(a, c) : op.add_by_composition(a, c);
    };
    const MatrixApplier apply(m);
    std::vector<std::uint64_t> basis(n);
    std::vector<std::uint64_t> images(n);
    for (unsigned i = 0; i < n; ++i) {
        basis[i] = std::uint64_t{1} << (n - 1 - i);
        images[i] = m.row(i);
    }
    const std::uint64_t q = std::uint64_t{1} << n;
    for (std::uint64_t x = 0; x < q; ++x) {
        const std::uint64_t xm = apply(x);
        for (unsigned i = 0; i < n; ++i) {
            if (apply(add(x, basis[i])) != add(xm, images[i])) {
                return false;
            }
        }
    }
    return true;
}

inline bool is_circ_linear(const BinMatrix& m, const AltOperation& op, EvalPath path = EvalPath::table) {
    return is_circ_linear(m, ParallelOperation({op}), path);
}

// Block form [[A, B], [0, D]] with A 2x2, D d x d and bD = b.
struct HCircStructure {
    BinMatrix a;
    BinMatrix b;
    BinMatrix d;

    BinMatrix assemble() const {
        const unsigned dim = d.rows();
        BinMatrix m(dim + 2, dim + 2);
        m.paste(0, 0, a);
        m.paste(0, 2, b);
        m.paste(2, 2, d);
        return m;
    }
};

// Decomposes M against the single-block characterization of H_o for
// d = n-2; nullopt if any condition fails.
inline std::optional<HCircStructure> structure_check(const BinMatrix& m, const AltOperation& op) {
    const unsigned n = op.bits();
    if (!m.is_square() || m.rows() != n) {
        throw dimension_error("matrix does not match the operation dimension");
    }
    const unsigned d = n - 2;
    HCircStructure s{m.block(0, 0, 2, 2), m.block(0, 2, 2, d), m.block(2, 2, d, d)};
    if (!m.block(2, 0, d, 2).is_zero()) {
        return std::nullopt;
    }
    if (!s.a.is_invertible() || !s.d.is_invertible()) {
        return std::nullopt;
    }
    if (s.d.apply(op.defining_vector()) != op.defining_vector()) {
        return std::nullopt;
    }
    return s;
}

// All invertible d x d matrices, by filtering every bit pattern.
inline std::vector<BinMatrix> general_linear_group(unsigned d) {
    if (d == 0 || d > 4) {
        throw capacity_error("GL(d,2) enumeration limited to d <= 4");
    }
    std::vector<BinMatrix> out;
    const std::uint64_t total = std::uint64_t{1} << (d * d);
    std::vector<std::uint64_t> rows(d);
    for (std::uint64_t pattern = 0; pattern < total; ++pattern) {
        for (unsigned i = 0; i < d; ++i) {
            rows[i] = (pattern >> (d * (d - 1 - i))) & low_mask(d);
        }
        BinMatrix m = BinMatrix::from_rows(d, rows);
        if (m.is_invertible()) {
            out.push_back(std::move(m));
        }
    }
    return out;
}

// H_o for one block, generated from the (A, B, D) parametrization.
inline std::vector<BinMatrix> enumerate_hcirc(const AltOperation& op) {
    const unsigned n = op.bits();
    if (n > 5) {
        throw capacity_error("H_o enumeration limited to n <= 5");
    }
    const unsigned d = n - 2;
    const std::vector<BinMatrix> gl2 = general_linear_group(2);
    std::vector<BinMatrix> stabilizers;
    for (BinMatrix& dm : general_linear_group(d)) {
        if (dm.apply(op.defining_vector()) == op.defining_vector()) {
            stabilizers.push_back(std::move(dm));
        }
    }
    std::vector<BinMatrix> out;
    out.reserve(gl2.size() * stabilizers.size() << (2 * d));
    const std::uint64_t b_patterns = std::uint64_t{1} << (2 * d);
    for (const BinMatrix& a : gl2) {
        for (const BinMatrix& dm : stabilizers) {
            for (std::uint64_t p = 0; p < b_patterns; ++p) {
                const BinMatrix bm = BinMatrix::from_rows(d, {p >> d, p & low_mask(d)});
                out.push_back(HCircStructure{a, bm, dm}.assemble());
            }
        }
    }
    return out;
}

// H_o for one block by testing every element of GL(n,2); independent of
// the parametrization above.
inline std::vector<BinMatrix> brute_force_hcirc(const AltOperation& op, unsigned threads = 1) {
    const std::vector<BinMatrix> gl = general_linear_group(op.bits());
    std::vector<char> keep(gl.size(), 0);
    parallel_for(gl.size(), threads, [&](std::size_t i) { keep[i] = is_circ_linear(gl[i], op) ? 1 : 0; });
    std::vector<BinMatrix> out;
    for (std::size_t i = 0; i < gl.size(); ++i) {
        if (keep[i]) {
            out.push_back(gl[i]);
        }
    }
    return out;
}

using BigInt = boost::multiprecision::cpp_int;

// m^3 * m! * 3 * 2^(3n-6) * prod_{h=0}^{n-4} (2^(n-3) - 2^h) * [(m^2 - m) 2^(n^2-5n+6) - 1]
// evaluated exactly. For m = 1 the bracket is -1 and the literal (negative)
// value is returned; the bound is only meaningful for m >= 2.
inline BigInt conjecture_bound(unsigned n, unsigned m) {
    if (n < 3 || m < 1) {
        throw dimension_error("conjecture bound needs n >= 3 and m >= 1");
    }
    BigInt mm = m;
    BigInt factorial = 1;
    for (unsigned i = 2; i <= m; ++i) {
        factorial *= i;
    }
    BigInt value = mm * mm * mm * factorial * 3;
    value <<= (3 * n - 6);
    for (unsigned h = 0; h + 4 <= n; ++h) {
        value *= (BigInt(1) << (n - 3)) - (BigInt(1) << h);
    }
    BigInt bracket = (mm * mm - mm) << (n * n - 5 * n + 6);
    bracket -= 1;
    return value * bracket;
}

inline bool conjecture_applies(unsigned m) { return m >= 2; }

inline BinMatrix block_diagonal(const std::vector<BinMatrix>& blocks) {
    unsigned total = 0;
    for (const BinMatrix& b : blocks) {
        if (!b.is_square()) {
            throw dimension_error("diagonal blocks must be square");
        }
        total += b.rows();
    }
    BinMatrix out(total, total);
    unsigned offset = 0;
    for (const BinMatrix& b : blocks) {
        out.paste(offset, offset, b);
        offset += b.rows();
    }
    return out;
}

// Sends block i of the input to block perm[i] of the output.
inline BinMatrix block_permutation_matrix(const std::vector<unsigned>& perm, unsigned block_bits) {
    const unsigned total = static_cast<unsigned>(perm.size()) * block_bits;
    BinMatrix out(total, total);
    for (unsigned i = 0; i < perm.size(); ++i) {
        for (unsigned j = 0; j < block_bits; ++j) {
            out.set(i * block_bits + j, perm[i] * block_bits + j, true);
        }
    }
    return out;
}

enum class WitnessFamily { block_diagonal, block_permutation, product, extra };

struct WitnessReport {
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    std::size_t candidates = 0;
    std::size_t rejected = 0;
    std::size_t duplicates = 0;
    std::size_t verified_block_diagonal = 0;
    std::size_t verified_block_permutation = 0;
    std::size_t verified_product = 0;
    std::size_t verified_extra = 0;
    std::vector<BinMatrix> witnesses;  // distinct verified elements, in discovery order

    std::size_t verified() const { return witnesses.size(); }
};

// Certified lower bound on |H_o| for a parallel operation: candidates come
// from block-diagonal assemblies of single-block H_o elements, block
// permutations, and random products of already verified elements; every one
// is checked with is_circ_linear before it counts. Deterministic given seed.
inline WitnessReport parallel_hcirc_witnesses(const ParallelOperation& op, std::size_t budget, std::uint64_t seed,
                                              const std::vector<BinMatrix>& extra = {}, unsigned threads = 1) {
    const unsigned m = op.block_count();
    const unsigned nb = op.block(0).bits();
    WitnessReport report;
    report.seed = seed;
    report.budget = budget;

    std::vector<std::vector<BinMatrix>> block_pools;
    if (nb <= 5) {
        for (const AltOperation& block : op.blocks()) {
            block_pools.push_back(enumerate_hcirc(block));
        }
    }
    std::vector<std::vector<unsigned>> perms;
    {
        std::vector<unsigned> p(m);
        std::iota(p.begin(), p.end(), 0u);
        if (m <= 6) {
            do {
                perms.push_back(p);
            } while (std::next_permutation(p.begin(), p.end()));
        }
    }

    CounterRng rng(seed);
    std::unordered_set<BinMatrix, BinMatrixHash> seen;
    std::size_t next_perm = 0;
    std::size_t next_extra = 0;

    struct Candidate {
        BinMatrix matrix;
        WitnessFamily family;
    };

    auto random_block_diagonal = [&] {
        std::vector<BinMatrix> parts;
        for (const auto& pool : block_pools) {
            parts.push_back(pool[rng.below(pool.size())]);
        }
        return block_diagonal(parts);
    };
    auto random_permutation = [&] {
        std::vector<unsigned> p(m);
        std::iota(p.begin(), p.end(), 0u);
        for (unsigned i = m; i > 1; --i) {
            std::swap(p[i - 1], p[rng.below(i)]);
        }
        return block_permutation_matrix(p, nb);
    };

    constexpr std::size_t batch = 64;
    while (report.candidates < budget) {
        std::vector<Candidate> wave;
        while (wave.size() < batch && report.candidates + wave.size() < budget) {
            if (next_extra < extra.size()) {
                wave.push_back({extra[next_extra++], WitnessFamily::extra});
                continue;
            }
            const std::size_t slot = (report.candidates + wave.size()) % 3;
            if (slot == 1 || block_pools.empty()) {
                if (next_perm < perms.size()) {
                    wave.push_back({block_permutation_matrix(perms[next_perm++], nb), WitnessFamily::block_permutation});
                } else {
                    wave.push_back({random_permutation(), WitnessFamily::block_permutation});
                }
            } else if (slot == 2 && report.witnesses.size() >= 2) {
                const std::size_t factors = 2 + rng.below(2);
                BinMatrix prod = report.witnesses[rng.below(report.witnesses.size())];
                for (std::size_t f = 1; f < factors; ++f) {
                    prod = prod * report.witnesses[rng.below(report.witnesses.size())];
                }
                wave.push_back({std::move(prod), WitnessFamily::product});
            } else {
                wave.push_back({random_block_diagonal(), WitnessFamily::block_diagonal});
            }
        }
        std::vector<char> ok(wave.size(), 0);
        parallel_for(wave.size(), threads, [&](std::size_t i) {
            if (!seen.count(wave[i].matrix)) {
                ok[i] = is_circ_linear(wave[i].matrix, op) ? 1 : 0;
            }
        });
        for (std::size_t i = 0; i < wave.size(); ++i) {
            ++report.candidates;
            if (seen.count(wave[i].matrix)) {
                ++report.duplicates;
                continue;
            }
            if (!ok[i]) {
                ++report.rejected;
                continue;
            }
            seen.insert(wave[i].matrix);
            report.witnesses.push_back(wave[i].matrix);
            switch (wave[i].family) {
                case WitnessFamily::block_diagonal: ++report.verified_block_diagonal; break;
                case WitnessFamily::block_permutation: ++report.verified_block_permutation; break;
                case WitnessFamily::product: ++report.verified_product; break;
                case WitnessFamily::extra: ++report.verified_extra; break;
            }
        }
    }
    return report;
}

}  // namespace altdiff
