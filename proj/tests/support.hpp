#pragma once

// Shared helpers for the test suite: independent oracles and random-input
// generators.  Everything here is deliberately written WITHOUT reusing the
// library's own logic wherever it serves as an oracle (evaluation, option
// enumeration, satisfiability), so the two sides can disagree.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "varcg/pc.hpp"

namespace testsupport {

// --- independent pc evaluation oracle --------------------------------------

inline bool oracle_eval(const varcg::PcRef& pc,
                        const std::function<bool(const std::string&)>& lookup) {
    using varcg::PcKind;
    switch (pc->kind()) {
        case PcKind::True:  return true;
        case PcKind::False: return false;
        case PcKind::Atom:  return lookup(pc->atom());
        case PcKind::Not:   return !oracle_eval(pc->operand(), lookup);
        case PcKind::And: {
            bool all = true;
            for (const auto& op : pc->operands()) all = all && oracle_eval(op, lookup);
            return all;
        }
        case PcKind::Or: {
            bool any = false;
            for (const auto& op : pc->operands()) any = any || oracle_eval(op, lookup);
            return any;
        }
    }
    return false;
}

inline void oracle_collect_options(const varcg::PcRef& pc, std::set<std::string>& out) {
    using varcg::PcKind;
    switch (pc->kind()) {
        case PcKind::Atom: out.insert(pc->atom()); break;
        case PcKind::Not:  oracle_collect_options(pc->operand(), out); break;
        case PcKind::And:
        case PcKind::Or:
            for (const auto& op : pc->operands()) oracle_collect_options(op, out);
            break;
        default: break;
    }
}

/// Truth-table equivalence over the union of both formulas' options.
inline bool truth_table_equivalent(const varcg::PcRef& a, const varcg::PcRef& b) {
    std::set<std::string> opts;
    oracle_collect_options(a, opts);
    oracle_collect_options(b, opts);
    std::vector<std::string> names(opts.begin(), opts.end());
    const std::uint64_t combos = 1ull << names.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
        auto lookup = [&](const std::string& n) {
            for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == n) return ((mask >> i) & 1ull) != 0;
            return false;
        };
        if (oracle_eval(a, lookup) != oracle_eval(b, lookup)) return false;
    }
    return true;
}

/// Exhaustive satisfiability oracle.
inline bool oracle_satisfiable(const varcg::PcRef& pc) {
    std::set<std::string> opts;
    oracle_collect_options(pc, opts);
    std::vector<std::string> names(opts.begin(), opts.end());
    const std::uint64_t combos = 1ull << names.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
        auto lookup = [&](const std::string& n) {
            for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == n) return ((mask >> i) & 1ull) != 0;
            return false;
        };
        if (oracle_eval(pc, lookup)) return true;
    }
    return false;
}

// --- random pc generation ---------------------------------------------------

/// Random formula over a small option pool; depth-limited.
inline varcg::PcRef random_pc(std::mt19937& rng, const std::vector<std::string>& pool,
                              int depth = 3) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 2);
    switch (pick(rng)) {
        case 0: return varcg::pc_true();
        case 1: return varcg::pc_false();
        case 2: {
            std::uniform_int_distribution<std::size_t> idx(0, pool.size() - 1);
            return varcg::pc_atom(pool[idx(rng)]);
        }
        case 3: return varcg::pc_not(random_pc(rng, pool, depth - 1));
        case 4: return varcg::pc_and(random_pc(rng, pool, depth - 1),
                                     random_pc(rng, pool, depth - 1));
        default: return varcg::pc_or(random_pc(rng, pool, depth - 1),
                                     random_pc(rng, pool, depth - 1));
    }
}

// --- misc -------------------------------------------------------------------

/// Check structural invariants the smart constructors must maintain.
inline bool well_formed(const varcg::PcRef& pc, bool top = true) {
    using varcg::PcKind;
    switch (pc->kind()) {
        case PcKind::True:
        case PcKind::False:
            return top;  // constants never appear inside composites
        case PcKind::Atom:
            return true;
        case PcKind::Not: {
            auto k = pc->operand()->kind();
            if (k == PcKind::True || k == PcKind::False || k == PcKind::Not) return false;
            return well_formed(pc->operand(), false);
        }
        case PcKind::And:
        case PcKind::Or: {
            if (pc->operands().size() < 2) return false;
            for (const auto& op : pc->operands()) {
                if (op->kind() == pc->kind()) return false;  // must be flattened
                if (!well_formed(op, false)) return false;
            }
            return true;
        }
    }
    return false;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("varcg_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testsupport
