#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace varcg {

// ---------------------------------------------------------------------------
// Presence conditions
//
// A presence condition is an immutable boolean formula over configuration
// option names.  Values are shared and never mutated after construction, so
// subtrees can be reused freely.  The smart constructors below are the only
// way to build composite nodes; they constant-fold, flatten nested ops of the
// same kind, and drop adjacent duplicate atoms, and they guarantee:
//
//   * TrueConst / FalseConst never appear inside a composite node,
//   * And / Or always have >= 2 operands,
//   * Not never wraps a constant or another Not.
//
// No BDD/SAT canonicalization is attempted: `a && b` and `b && a` stay
// distinct trees (they are truth-table equivalent, which is what matters for
// projection), and option counting is deliberately syntactic.
// ---------------------------------------------------------------------------

enum class PcKind { True, False, Atom, Not, And, Or };

class Pc;
using PcRef = std::shared_ptr<const Pc>;

class Pc {
public:
    PcKind kind() const { return kind_; }

    /// Option name; only valid for Atom nodes.
    const std::string& atom() const { return atom_; }

    /// Negated operand; only valid for Not nodes.
    const PcRef& operand() const { return operands_.front(); }

    /// Operand list; only valid for And / Or nodes (size >= 2).
    const std::vector<PcRef>& operands() const { return operands_; }

    // Nodes are created through the free functions below.
    struct MakeTag {};
    Pc(MakeTag, PcKind kind, std::string atom, std::vector<PcRef> operands)
        : kind_(kind), atom_(std::move(atom)), operands_(std::move(operands)) {}

private:
    PcKind kind_;
    std::string atom_;
    std::vector<PcRef> operands_;
};

/// Shared constants; `pc_true()` always returns the same object.
PcRef pc_true();
PcRef pc_false();

/// Atom over a configuration option.  The name must match
/// [A-Za-z_][A-Za-z0-9_]* or a ParseError is raised.
PcRef pc_atom(std::string_view name);

/// Negation with folding: !True -> False, !False -> True, !!x -> x.
PcRef pc_not(const PcRef& a);

/// Conjunction / disjunction with folding, flattening and adjacent-duplicate
/// removal.  pc_and(x, pc_true()) is structurally equal to x.
PcRef pc_and(const PcRef& a, const PcRef& b);
PcRef pc_or(const PcRef& a, const PcRef& b);

/// Structural equality (same tree shape, same atom spelling).
bool pc_equal(const PcRef& a, const PcRef& b);

/// A (partial) configuration: option name -> on/off.  Options not bound in
/// the map take `default_for_unbound`.
struct ConfigAssignment {
    std::map<std::string, bool> bindings;
    bool default_for_unbound = false;

    bool value_of(const std::string& name) const {
        auto it = bindings.find(name);
        return it == bindings.end() ? default_for_unbound : it->second;
    }
};

/// Evaluate under a configuration.
bool evaluate(const PcRef& pc, const ConfigAssignment& config);

/// Distinct option names appearing anywhere in the formula.
std::set<std::string> options_of(const PcRef& pc);

/// |options_of(pc)| — the syntactic option count used for edge weights.
std::size_t option_count(const PcRef& pc);

/// Maximum number of distinct options `is_satisfiable` will enumerate.
inline constexpr std::size_t kSatOptionLimit = 24;

/// Satisfiability by exhaustive enumeration of the formula's own options.
/// Throws OptionLimitError when more than kSatOptionLimit options appear.
bool is_satisfiable(const PcRef& pc);

/// Canonical text form: `defined(X)`, `!`, `&&`, `||`, parentheses, and the
/// constants `1` / `0`.  Stable: render(parse_pc(render(x))) == render(x).
std::string render(const PcRef& pc);

/// Parse the grammar produced by `render` (plus bare option names and the
/// usual precedence: ! over && over ||).  Empty input is a ParseError; any
/// other token (numbers beyond 1/0, comparison operators, arithmetic) is a
/// ParseError carrying the byte offset.
PcRef parse_pc(std::string_view text);

/// True when `name` is lexically a valid option name.
bool is_option_name(std::string_view name);

}  // namespace varcg
