#pragma once

#include "treebf/tree.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace treebf {

// ---------------------------------------------------------------------------
// Variables are interned; `r` is reserved for the root constant.

using VarId = int;
inline constexpr VarId kRootVar = 0;

VarId intern(std::string_view name);
const std::string& var_name(VarId id);
std::vector<VarId> intern_all(std::span<const std::string> names);
/// "<prefix>0", ..., "<prefix>{n-1}".
std::vector<VarId> numbered_vars(std::string_view prefix, std::size_t n);

class FormulaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// AST.  Negation-normal form by construction: only atoms carry a negation
// flag.  `conj`/`disj` are countable connectives (truncated to an explicit
// list); finitary ones are flagged.  `eta`/`neta` are the descendant-tree
// membership schema and its dual, truncated at a declared path-length bound.

enum class Kind { equal, parent, root, color, conj, disj, exists, forall, eta, neta };

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

class Formula {
public:
  Kind kind() const noexcept { return kind_; }
  bool negated() const noexcept { return negated_; }
  bool finitary() const noexcept { return finitary_; }
  bool is_atom() const noexcept { return kind_ <= Kind::color; }
  bool is_schema() const noexcept { return kind_ == Kind::eta || kind_ == Kind::neta; }
  bool is_quantifier() const noexcept { return kind_ == Kind::exists || kind_ == Kind::forall; }

  /// Atom arguments, quantifier block, or schema variables (element first,
  /// then the tuple).
  const std::vector<VarId>& vars() const noexcept { return vars_; }
  const std::vector<FormulaPtr>& children() const noexcept { return children_; }
  const Formula& body() const { return *children_.at(0); }
  std::uint64_t color() const noexcept { return color_; }
  int index() const noexcept { return index_; }
  int bound() const noexcept { return bound_; }

  /// Sorted free variables, `r` included when it occurs.
  const std::vector<VarId>& free_vars() const noexcept { return free_; }
  /// Finitary and quantifier-free (no schemas either).
  bool quantifier_free() const noexcept { return qf_; }
  std::size_t tree_size() const noexcept { return tree_size_; }

  // Construction goes through the builders below.
  struct Token {};
  Formula(Token, Kind kind, bool negated, bool finitary, std::vector<VarId> vars,
          std::vector<FormulaPtr> children, std::uint64_t color, int index, int bound);

private:
  Kind kind_;
  bool negated_ = false;
  bool finitary_ = false;
  bool qf_ = false;
  std::vector<VarId> vars_;
  std::vector<FormulaPtr> children_;
  std::uint64_t color_ = 0;
  int index_ = 0;
  int bound_ = 0;
  std::vector<VarId> free_;
  std::size_t tree_size_ = 1;
};

FormulaPtr eq(VarId x, VarId y, bool negated = false);
/// `x` is the parent of `y`.
FormulaPtr parent_of(VarId x, VarId y, bool negated = false);
FormulaPtr is_root(VarId x, bool negated = false);
FormulaPtr has_color(std::uint64_t k, VarId x, bool negated = false);
FormulaPtr conj(std::vector<FormulaPtr> parts, bool finitary = false);
FormulaPtr disj(std::vector<FormulaPtr> parts, bool finitary = false);
FormulaPtr exists(std::vector<VarId> block, FormulaPtr body);
FormulaPtr forall(std::vector<VarId> block, FormulaPtr body);
/// Membership of `x` in the descendant tree of `tuple[i]` avoiding `tuple`.
FormulaPtr eta(int i, VarId x, std::vector<VarId> tuple, int bound);
/// NNF dual of `eta`.
FormulaPtr neta(int i, VarId x, std::vector<VarId> tuple, int bound);

/// NNF negation.
FormulaPtr dual(const FormulaPtr& f);
/// Replaces free occurrences of `from` by `to`.
FormulaPtr substitute(const FormulaPtr& f, VarId from, VarId to);

// ---------------------------------------------------------------------------
// Text syntax:
//   (= x y) (parent x y) (root x) (color k x) (not <atom>)
//   (and f...) (or f...)            countable connectives
//   (fand f...) (for f...)          finitary connectives
//   (all (x...) f) (ex (x...) f)
//   (eta i (x t0 t1 ...) #bound) (neta i (x t0 t1 ...) #bound)

FormulaPtr parse_formula(std::string_view text);
std::string to_string(const Formula& f);
inline std::string to_string(const FormulaPtr& f) { return to_string(*f); }

// ---------------------------------------------------------------------------
// Classification

/// Minimal levels (all >= 1) in the Sigma/Pi hierarchy and in the
/// E/A/Ebar/Abar hierarchy. Finitary quantifier-free formulas sit at level 0
/// of Sigma/Pi internally and are reported at 1.
struct ComplexityTag {
  int sigma = 1;
  int pi = 1;
  int e = 1;
  int a = 1;
  int ebar = 1;
  int abar = 1;

  friend bool operator==(const ComplexityTag&, const ComplexityTag&) = default;
};

ComplexityTag classify(const Formula& f);
inline ComplexityTag classify(const FormulaPtr& f) { return classify(*f); }
std::string format_tag(const ComplexityTag& tag);

// ---------------------------------------------------------------------------
// Evaluation

using Assignment = std::map<std::string, NodeId>;

/// Model checker over one finite tree. Keeps a cache keyed by subformula and
/// the values of its free variables, so repeated queries against shared
/// subformulas are cheap. Not thread-safe.
class Evaluator {
public:
  explicit Evaluator(const FiniteTree& t);
  explicit Evaluator(const ColoredFiniteTree& t);

  bool eval(const FormulaPtr& f, const Assignment& assignment = {});
  /// Positional binding: `vars[i] := values[i]`.
  bool eval(const FormulaPtr& f, std::span<const VarId> vars, std::span<const NodeId> values);

  std::size_t cache_size() const noexcept { return memo_.size(); }

private:
  struct PrunePlan {
    std::vector<std::pair<const Formula*, int>> checks; // (cheap subformula, block position it waits for)
  };

  bool run(const Formula& f);
  bool eval_node(const Formula& f);
  bool eval_block(const Formula& f);
  bool eval_schema(const Formula& f) const;
  const PrunePlan& plan_for(const Formula& f);

  const FiniteTree& tree_;
  const std::vector<std::uint64_t>* colors_ = nullptr;
  std::vector<NodeId> env_;
  std::unordered_map<std::string, bool> memo_;
  std::unordered_map<const Formula*, PrunePlan> plans_;
  // Caches are keyed by node address; holding the roots keeps addresses unique.
  std::vector<FormulaPtr> roots_;
};

bool eval(const FiniteTree& t, const FormulaPtr& f, const Assignment& assignment = {});
bool eval(const ColoredFiniteTree& t, const FormulaPtr& f, const Assignment& assignment = {});

/// Replaces every schema by its explicit instance list, truncated at
/// max(declared bound, model_size).
FormulaPtr expand_schemas(const FormulaPtr& f, std::size_t model_size);

// ---------------------------------------------------------------------------
// Descendant trees inside the logic

FormulaPtr eta_formula(int i, VarId x, std::span<const VarId> tuple, int bound);

/// Restricts every quantifier of `f` to the descendant tree of `tuple[i]`
/// avoiding `tuple`; the root constant becomes `tuple[i]`. The tuple
/// variables must not be bound inside `f`.
FormulaPtr relativize(const FormulaPtr& f, int i, std::span<const VarId> tuple, int bound);

} // namespace treebf
