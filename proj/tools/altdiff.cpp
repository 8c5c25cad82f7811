#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "altdiff.hpp"

using namespace altdiff;

namespace {

enum Exit { ok = 0, usage = 1, capacity = 2, verification = 3 };

struct Globals {
    bool json = false;
    bool timing = false;
    unsigned threads = 0;
    std::string output;
};

Globals g;

void emit(const std::string& text) {
    if (g.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(g.output, std::ios::binary);
    if (!out) {
        throw parse_error("cannot write '" + g.output + "'");
    }
    out << text;
}

void emit(const json& j) { emit(j.dump(2) + "\n"); }

std::uint64_t seed_or_fresh(const std::optional<std::uint64_t>& seed) {
    if (seed) {
        return *seed;
    }
    const std::uint64_t s = fresh_seed();
    std::cerr << "seed: " << s << "\n";
    return s;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }
    void report(json& j) const {
        if (g.timing) {
            j["elapsed_seconds"] = seconds();
        }
    }
    void report() const {
        if (g.timing) {
            std::cerr << "elapsed: " << seconds() << " s\n";
        }
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<std::uint64_t> parse_hex_list(const std::vector<std::string>& items) {
    std::vector<std::uint64_t> out;
    for (const std::string& item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (!part.empty()) out.push_back(parse_hex_value(part));
        }
    }
    return out;
}

CipherSpec load_cipher(const std::string& name, const std::optional<unsigned>& rounds) {
    CipherSpec spec = resolve_cipher(name);
    return rounds ? spec.with_rounds(*rounds) : spec;
}

// Single-block operation for block-level commands: "xor" or a descriptor,
// from which block `index` is taken.
BlockOperation block_operation(const std::string& desc, unsigned bits, unsigned index) {
    if (desc == "xor" || desc == "+") {
        return BlockOperation::xor_op(bits);
    }
    const ParallelOperation p = desc.substr(0, 1) == "@"
                                    ? parse_operation_file_text(read_text_file(desc.substr(1)))
                                    : parse_parallel_descriptor(desc);
    if (index >= p.block_count()) {
        throw dimension_error("block index " + std::to_string(index) + " out of range");
    }
    if (p.block(index).bits() != bits) {
        throw dimension_error("operation block size does not match the s-box");
    }
    return BlockOperation::from(p.block(index));
}

std::string join_hex(const std::vector<std::uint64_t>& v, unsigned bits) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? " " : "") + to_hex(v[i], bits);
    }
    return out;
}

// --- op -------------------------------------------------------------------

struct OpArgs {
    unsigned n = 4;
    std::string b = "01";
    unsigned m = 1;
    bool dot = false;
};

AltOperation make_block(const OpArgs& a) { return AltOperation(a.n, parse_hex_value(a.b)); }

int cmd_op_info(const OpArgs& a) {
    const AltOperation op = make_block(a);
    const ParallelOperation p = ParallelOperation::uniform(op, a.m);
    if (g.json) {
        json j = op_info_json(op);
        j["blocks"] = a.m;
        j["parallel_descriptor"] = p.descriptor();
        j["parallel_weak_key_count"] = std::uint64_t{1} << (a.m * op.weak_dimension());
        json cay = json::array(), dot = json::array();
        for (std::uint64_t x = 0; x < op.size(); ++x) {
            json rc = json::array(), rd = json::array();
            for (std::uint64_t y = 0; y < op.size(); ++y) {
                rc.push_back(to_hex(op.add(x, y), op.bits()));
                rd.push_back(to_hex(op.dot(x, y), op.bits()));
            }
            cay.push_back(rc);
            dot.push_back(rd);
        }
        j["cayley"] = cay;
        j["dot"] = dot;
        emit(j);
        return ok;
    }
    std::string out = "operation " + op.descriptor() + "\n";
    if (a.m > 1) {
        out += "parallel " + p.descriptor() + "\n";
    }
    out += "weak keys (dimension " + std::to_string(op.weak_dimension()) + "): " +
           join_hex(op.weak_keys(), op.bits()) + "\n";
    out += "error set: " + join_hex(op.error_set(), op.bits()) + "\n";
    if (a.m > 1) {
        out += "parallel weak keys: " + std::to_string(std::uint64_t{1} << (a.m * op.weak_dimension())) + "\n";
    }
    if (op.bits() <= 8) {
        out += "\ncayley\n" + cayley_csv(op) + "\ndot\n" + dot_csv(op);
    }
    emit(out);
    return ok;
}

int cmd_op_cayley(const OpArgs& a) {
    const AltOperation op = make_block(a);
    if (op.bits() > 8) {
        throw capacity_error("table export limited to 8-bit blocks");
    }
    emit(a.dot ? dot_csv(op) : cayley_csv(op));
    return ok;
}

// --- ddt ------------------------------------------------------------------

struct DdtArgs {
    std::string cipher = "paper16";
    std::string op = "xor";
    unsigned block = 0;
    bool csv = false;
};

int cmd_ddt(const DdtArgs& a) {
    const CipherSpec spec = resolve_cipher(a.cipher);
    const DDTable t = ddt(spec.sbox(), block_operation(a.op, spec.geometry().block_bits, a.block));
    if (g.json) {
        emit(ddt_json(t));
    } else {
        emit(a.csv ? t.to_csv() : t.to_text() + "uniformity " + std::to_string(t.uniformity()) + "\n");
    }
    return ok;
}

// --- check-linear ---------------------------------------------------------

struct LinearArgs {
    std::string cipher;
    std::string matrix;
    std::string op = "circ:4:01";
    std::string path = "table";
};

int cmd_check_linear(const LinearArgs& a) {
    if (a.cipher.empty() == a.matrix.empty()) {
        throw std::invalid_argument("give exactly one of --cipher or --matrix");
    }
    BinMatrix m = a.cipher.empty() ? BinMatrix::parse(read_text_file(a.matrix)) : resolve_cipher(a.cipher).diffusion();
    if (!m.is_square()) {
        throw dimension_error("matrix is not square");
    }
    if (a.path != "table" && a.path != "composition") {
        throw std::invalid_argument("--path must be table or composition");
    }
    ParallelOperation p = a.op.substr(0, 1) == "@" ? parse_operation_file_text(read_text_file(a.op.substr(1)))
                                                   : parse_parallel_descriptor(a.op);
    const unsigned nb = p.block(0).bits();
    if (m.rows() % nb != 0) {
        throw dimension_error("matrix size is not a multiple of the block size");
    }
    if (p.block_count() == 1 && m.rows() / nb > 1) {
        p = ParallelOperation::uniform(p.block(0), m.rows() / nb);
    }
    const bool invertible = m.is_invertible();
    const bool pass = is_circ_linear(m, p, a.path == "table" ? EvalPath::table : EvalPath::composition);
    if (g.json) {
        emit(json{{"operation", p.descriptor()}, {"invertible", invertible}, {"circ_linear", pass},
                  {"verdict", pass ? "PASS" : "FAIL"}});
    } else {
        emit(std::string(pass ? "PASS" : "FAIL") + " " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
             " matrix under " + p.descriptor() + (invertible ? "" : " (singular)") + "\n");
    }
    return pass ? ok : verification;
}

// --- hcirc / witnesses / conjecture ----------------------------------------

struct HcircArgs {
    unsigned n = 4;
    std::string b = "01";
    bool brute = false;
    bool list = false;
};

int cmd_hcirc(const HcircArgs& a) {
    const Stopwatch clock;
    const AltOperation op(a.n, parse_hex_value(a.b));
    const auto h = enumerate_hcirc(op);
    std::optional<std::size_t> brute;
    bool agree = true;
    if (a.brute) {
        const auto all = brute_force_hcirc(op, g.threads);
        brute = all.size();
        const std::unordered_set<BinMatrix, BinMatrixHash> set(h.begin(), h.end());
        agree = all.size() == h.size();
        for (const BinMatrix& m : all) {
            agree = agree && set.count(m);
        }
    }
    if (g.json) {
        json j{{"operation", op.descriptor()}, {"order", h.size()}};
        if (brute) {
            j["brute_force_order"] = *brute;
            j["agree"] = agree;
        }
        if (a.list) {
            json ms = json::array();
            for (const BinMatrix& m : h) ms.push_back(matrix_json(m));
            j["elements"] = ms;
        }
        clock.report(j);
        emit(j);
    } else {
        std::string out = "H for " + op.descriptor() + ": " + std::to_string(h.size()) + " elements\n";
        if (brute) {
            out += "brute force over GL(" + std::to_string(a.n) + ",2): " + std::to_string(*brute) +
                   (agree ? " (agrees)\n" : " (DISAGREES)\n");
        }
        if (a.list) {
            for (const BinMatrix& m : h) out += "\n" + m.to_text();
        }
        emit(out);
        clock.report();
    }
    return agree ? ok : verification;
}

struct WitnessArgs {
    std::string op = "circ:4:01";
    unsigned blocks = 4;
    std::size_t budget = 10000;
    std::optional<std::uint64_t> seed;
    std::string cipher;
    bool matrices = false;
};

int cmd_witnesses(const WitnessArgs& a) {
    const Stopwatch clock;
    const ParallelOperation p = parse_parallel_descriptor(a.op, a.blocks);
    std::vector<BinMatrix> extra;
    if (!a.cipher.empty()) {
        extra.push_back(resolve_cipher(a.cipher).diffusion());
    }
    const std::uint64_t seed = seed_or_fresh(a.seed);
    const WitnessReport r = parallel_hcirc_witnesses(p, a.budget, seed, extra, g.threads);
    bool reverified = true;
    for (const BinMatrix& w : r.witnesses) {
        reverified = reverified && is_circ_linear(w, p, EvalPath::composition);
    }
    const BigInt bound = conjecture_bound(p.block(0).bits(), p.block_count());
    if (g.json) {
        json j = witness_report_json(r, a.matrices);
        j["operation"] = p.descriptor();
        j["reverified"] = reverified;
        j["conjecture_bound"] = bound.str();
        clock.report(j);
        emit(j);
    } else {
        std::string out = "operation " + p.descriptor() + ", seed " + std::to_string(seed) + "\n";
        out += "candidates " + std::to_string(r.candidates) + ", verified " + std::to_string(r.verified()) +
               ", rejected " + std::to_string(r.rejected) + ", duplicates " + std::to_string(r.duplicates) + "\n";
        out += "by family: block-diagonal " + std::to_string(r.verified_block_diagonal) + ", block-permutation " +
               std::to_string(r.verified_block_permutation) + ", product " + std::to_string(r.verified_product) +
               ", supplied " + std::to_string(r.verified_extra) + "\n";
        out += std::string("re-verification (composition path): ") + (reverified ? "ok" : "FAILED") + "\n";
        out += "conjectured order " + bound.str() + "\n";
        if (a.matrices) {
            for (const BinMatrix& m : r.witnesses) out += "\n" + m.to_text();
        }
        emit(out);
        clock.report();
    }
    return reverified ? ok : verification;
}

int cmd_conjecture(unsigned n, unsigned m) {
    const BigInt v = conjecture_bound(n, m);
    if (!conjecture_applies(m)) {
        std::cerr << "warning: the bound is only meaningful for m >= 2; printing the literal value\n";
    }
    if (g.json) {
        emit(json{{"n", n}, {"m", m}, {"value", v.str()}, {"applies", conjecture_applies(m)}});
    } else {
        emit(v.str() + "\n");
    }
    return ok;
}

// --- search / curve --------------------------------------------------------

struct SearchArgs {
    std::string cipher = "paper16";
    std::string op = "circ:4:01";
    unsigned rounds = 17;
    std::string engine = "markov";
    std::string restrict = "single-block";
    std::vector<std::string> din;
    std::uint64_t keys = 1024;
    std::uint64_t pairs = 0;
    std::optional<std::uint64_t> seed;
    bool allow_long = false;
};

struct Prepared {
    CipherSpec spec;
    DifferenceOperation op;
    SearchOptions opts;
    MonteCarloOptions mc;
    Engine engine;
};

Prepared prepare(const SearchArgs& a) {
    CipherSpec spec = resolve_cipher(a.cipher);
    DifferenceOperation op = parse_operation(a.op, spec.geometry());
    if (op.is_xor()) {
        throw std::invalid_argument("--op must be an alternative operation; XOR is always run alongside it");
    }
    SearchOptions opts;
    opts.rounds = a.rounds;
    opts.restriction = a.din.empty() ? parse_restriction(a.restrict) : Restriction::list;
    opts.inputs = parse_hex_list(a.din);
    opts.allow_long = a.allow_long;
    opts.threads = g.threads;
    const Engine engine = parse_engine(a.engine);
    MonteCarloOptions mc;
    mc.keys = a.keys;
    mc.pairs = a.pairs;
    mc.threads = g.threads;
    if (engine == Engine::montecarlo) {
        mc.seed = seed_or_fresh(a.seed);
    }
    return {std::move(spec), std::move(op), std::move(opts), mc, engine};
}

int cmd_search(const SearchArgs& a) {
    const Stopwatch clock;
    const Prepared p = prepare(a);
    const SearchReport r = p.engine == Engine::markov ? markov_best(p.spec, p.op, p.opts)
                                                      : montecarlo_best(p.spec, p.op, p.opts, p.mc);
    if (g.json) {
        json j = search_report_json(r);
        clock.report(j);
        emit(j);
    } else {
        emit(search_report_text(r));
        clock.report();
    }
    return ok;
}

int cmd_curve(const SearchArgs& a) {
    const Stopwatch clock;
    const Prepared p = prepare(a);
    const SearchReport r = curve(p.spec, p.op, p.opts, p.engine, p.mc);
    if (g.json) {
        json j = search_report_json(r);
        clock.report(j);
        emit(j);
    } else {
        emit(curve_csv(r));
        clock.report();
    }
    return ok;
}

// --- cipher ---------------------------------------------------------------

struct CipherArgs {
    std::string cipher = "paper16";
    std::optional<unsigned> rounds;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> round_keys;
    std::vector<std::string> blocks;
};

int cmd_cipher_show(const CipherArgs& a) {
    const CipherSpec spec = load_cipher(a.cipher, a.rounds);
    if (g.json) {
        emit(json{{"blocks", spec.geometry().blocks},
                  {"block_bits", spec.geometry().block_bits},
                  {"rounds", spec.rounds()},
                  {"sbox", spec.sbox().hex()},
                  {"diffusion", matrix_json(spec.diffusion())}});
    } else {
        emit(cipher_spec_text(spec));
    }
    return ok;
}

int cmd_crypt(const CipherArgs& a, bool forward) {
    const CipherSpec spec = load_cipher(a.cipher, a.rounds);
    LongKey key;
    if (!a.round_keys.empty()) {
        key.round_keys = parse_hex_list(a.round_keys);
    } else {
        key = keygen(spec, seed_or_fresh(a.seed));
    }
    check_key(spec, key);
    std::vector<std::string> outputs;
    std::string out;
    for (std::uint64_t x : parse_hex_list(a.blocks)) {
        if ((x & ~spec.geometry().mask()) != 0) {
            throw dimension_error("block " + to_hex(x, 64) + " wider than the cipher");
        }
        const std::uint64_t y = forward ? encrypt(spec, key, x) : decrypt(spec, key, x);
        outputs.push_back(to_hex(y, spec.bits()));
        out += outputs.back() + "\n";
    }
    if (g.json) {
        emit(json{{"direction", forward ? "encrypt" : "decrypt"},
                  {"seed", key.seed},
                  {"round_keys", hex_list(key.round_keys, spec.bits())},
                  {"outputs", outputs}});
    } else {
        emit(out);
    }
    return ok;
}

template <typename T>
void add_seed(CLI::App* cmd, std::optional<T>& seed) {
    cmd->add_option("--seed", seed, "RNG seed (random and printed to stderr if omitted)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Alternative-operation differential cryptanalysis toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--json", g.json, "Write a single JSON document instead of text");
    app.add_flag("--timing", g.timing, "Report elapsed wall time (stderr, or a JSON field)");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    app.add_option("-o,--output", g.output, "Write the report to a file instead of stdout");

    int status = ok;
    auto run = [&](auto fn) { return [&status, fn] { status = fn(); }; };

    OpArgs op_args;
    auto* op = app.add_subcommand("op", "Alternative operation tables and sets");
    op->require_subcommand(1);
    auto add_op_opts = [&](CLI::App* c) {
        c->add_option("--n", op_args.n, "Block size in bits")->capture_default_str();
        c->add_option("--b", op_args.b, "Defining vector b as hex (n-2 bits)")->capture_default_str();
    };
    auto* op_info = op->add_subcommand("info", "Weak keys, error set, Cayley and dot tables");
    add_op_opts(op_info);
    op_info->add_option("--m", op_args.m, "Block count for the parallel lift")->capture_default_str();
    op_info->callback(run([&] { return cmd_op_info(op_args); }));
    auto* op_cayley = op->add_subcommand("cayley", "Cayley table as CSV");
    add_op_opts(op_cayley);
    op_cayley->add_flag("--dot", op_args.dot, "Export the dot-product table instead");
    op_cayley->callback(run([&] { return cmd_op_cayley(op_args); }));

    DdtArgs ddt_args;
    auto* ddt_cmd = app.add_subcommand("ddt", "Difference distribution table of the cipher s-box");
    ddt_cmd->add_option("--cipher", ddt_args.cipher, "Cipher spec file or the built-in 'paper16'")->capture_default_str();
    ddt_cmd->add_option("--op", ddt_args.op, "xor, circ:<n>:<b>[,...] or @file")->capture_default_str();
    ddt_cmd->add_option("--block", ddt_args.block, "Which block of a per-block descriptor")->capture_default_str();
    ddt_cmd->add_flag("--csv", ddt_args.csv, "CSV with hex headers");
    ddt_cmd->callback(run([&] { return cmd_ddt(ddt_args); }));

    LinearArgs lin_args;
    auto* lin = app.add_subcommand("check-linear", "Check a matrix for linearity under + and the operation");
    lin->add_option("--cipher", lin_args.cipher, "Take the diffusion layer of this cipher");
    lin->add_option("--matrix", lin_args.matrix, "Matrix file, one 0/1 row per line");
    lin->add_option("--op", lin_args.op, "Operation descriptor")->capture_default_str();
    lin->add_option("--path", lin_args.path, "Evaluation path: table or composition")->capture_default_str();
    lin->callback(run([&] { return cmd_check_linear(lin_args); }));

    HcircArgs h_args;
    auto* hc = app.add_subcommand("hcirc", "Enumerate the single-block group of doubly linear maps");
    hc->add_option("--n", h_args.n, "Block size")->capture_default_str();
    hc->add_option("--b", h_args.b, "Defining vector as hex")->capture_default_str();
    hc->add_flag("--brute", h_args.brute, "Cross-check by filtering all of GL(n,2) (n <= 4)");
    hc->add_flag("--list", h_args.list, "Print every element");
    hc->callback(run([&] { return cmd_hcirc(h_args); }));

    WitnessArgs w_args;
    auto* wit = app.add_subcommand("witnesses", "Verified elements for a parallel operation");
    wit->add_option("--op", w_args.op, "Operation descriptor")->capture_default_str();
    wit->add_option("--blocks", w_args.blocks, "Block count")->capture_default_str();
    wit->add_option("--budget", w_args.budget, "Number of candidates to test")->capture_default_str();
    wit->add_option("--cipher", w_args.cipher, "Also test this cipher's diffusion layer");
    wit->add_flag("--matrices", w_args.matrices, "Print the verified matrices");
    add_seed(wit, w_args.seed);
    wit->callback(run([&] { return cmd_witnesses(w_args); }));

    unsigned conj_n = 4, conj_m = 4;
    auto* conj = app.add_subcommand("conjecture", "Exact conjectured order of the parallel group");
    conj->add_option("--n", conj_n, "Block size")->capture_default_str();
    conj->add_option("--m", conj_m, "Block count")->capture_default_str();
    conj->callback(run([&] { return cmd_conjecture(conj_n, conj_m); }));

    SearchArgs s_args;
    auto add_search_opts = [&](CLI::App* c) {
        c->add_option("--cipher", s_args.cipher, "Cipher spec file or the built-in 'paper16'")->capture_default_str();
        c->add_option("--op", s_args.op, "Alternative operation descriptor")->capture_default_str();
        c->add_option("--rounds", s_args.rounds, "Round count (curve: maximum)")->capture_default_str();
        c->add_option("--engine", s_args.engine, "markov or montecarlo")->capture_default_str();
        c->add_option("--restrict", s_args.restrict, "all, single-block or list")->capture_default_str();
        c->add_option("--din", s_args.din, "Explicit input differences (hex, comma separated)");
        c->add_option("--keys", s_args.keys, "Monte-Carlo key sample size")->capture_default_str();
        c->add_option("--pairs", s_args.pairs, "Monte-Carlo pairs per key (0 = all plaintexts)")->capture_default_str();
        c->add_flag("--allow-long", s_args.allow_long, "Permit the full input-difference sweep");
        add_seed(c, s_args.seed);
    };
    auto* search = app.add_subcommand("search", "Best differentials for + and the operation");
    add_search_opts(search);
    search->callback(run([&] { return cmd_search(s_args); }));
    auto* curve_cmd = app.add_subcommand("curve", "Best-differential curve over round counts as CSV");
    add_search_opts(curve_cmd);
    curve_cmd->callback(run([&] { return cmd_curve(s_args); }));

    CipherArgs c_args;
    auto* cipher = app.add_subcommand("cipher", "Cipher specification");
    cipher->require_subcommand(1);
    auto add_cipher_opts = [&](CLI::App* c) {
        c->add_option("--cipher", c_args.cipher, "Cipher spec file or the built-in 'paper16'")->capture_default_str();
        c->add_option("--rounds", c_args.rounds, "Override the round count");
    };
    auto* show = cipher->add_subcommand("show", "Print the spec file");
    add_cipher_opts(show);
    show->callback(run([&] { return cmd_cipher_show(c_args); }));
    for (bool forward : {true, false}) {
        auto* c = app.add_subcommand(forward ? "encrypt" : "decrypt", forward ? "Encrypt blocks" : "Decrypt blocks");
        add_cipher_opts(c);
        add_seed(c, c_args.seed);
        c->add_option("--round-keys", c_args.round_keys, "Explicit round keys (hex, comma separated)");
        c->add_option("blocks", c_args.blocks, "Hex blocks")->required();
        c->callback(run([&, forward] { return cmd_crypt(c_args, forward); }));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    } catch (const capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return capacity;
    } catch (const verification_error& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return verification;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    return status;
}
