#pragma once

#include "treebf/formula.hpp"
#include "treebf/tree.hpp"

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace treebf {

/// x0, x1, ...: the variable of tuple position k is "x<k>".
std::vector<VarId> position_vars(std::size_t len);

/// Literals pinning down the atomic type of `tuple` in `t`, written over
/// `vars` (same length).
std::vector<FormulaPtr> atomic_type_literals(const FiniteTree& t, std::span<const NodeId> tuple,
                                             std::span<const VarId> vars);

/// Builds the formulas defining {x : (B, x) >=_n (A, a)} for one tree A.
/// Subformulas are shared by (canonical code of the marked tuple, level,
/// direction). `K` caps the length of the universally quantified blocks;
/// blocks longer than the number of nodes of A outside the tuple plus one
/// are never needed, so any K above |A| gives a formula that is exact on
/// every finite tree.
class CharFormulaBuilder {
public:
  CharFormulaBuilder(const FiniteTree& A, int K);

  /// (B, x) >=_n (A, a); free variables are position_vars(|a|).
  FormulaPtr geq(std::span<const NodeId> a, int n);
  /// (B, x) <=_n (A, a).
  FormulaPtr leq(std::span<const NodeId> a, int n);

  std::size_t shared_nodes() const noexcept { return memo_.size(); }

private:
  FormulaPtr build(MarkedTuple& a, int n, bool geq_dir);
  void fresh_tuples(const MarkedTuple& a, std::size_t len, std::vector<MarkedTuple>& out) const;

  const FiniteTree& A_;
  int K_;
  std::unordered_map<std::string, FormulaPtr> memo_;
};

/// The formula psi with B |= psi(b) iff (B, b) >=_n (A, a).
/// Requires a rooted and ancestor-closed, n >= 1 and K >= 1.
FormulaPtr char_formula(const FiniteTree& A, std::span<const NodeId> a, int n, int K);

/// Nothing when (A, a) <=_n (B, b); otherwise a formula of A-level at most n
/// true of a in A and false of b in B.
std::optional<FormulaPtr> karp_witness(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                                       std::span<const NodeId> b, int n);

struct KarpSampleReport {
  int generated = 0;
  int true_at_a = 0;
  int distinguished = 0; // true at a and false at b
  std::optional<FormulaPtr> first_distinguishing;
};

/// Draws random formulas of A-level n with free variables position_vars(|a|)
/// until `count` of them hold at a (or 20 * count draws), and checks each at b.
KarpSampleReport karp_sample(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                             std::span<const NodeId> b, int n, int count, std::uint64_t seed);

struct ThetaResult {
  std::vector<FormulaPtr> theta; // one sentence per tuple entry
  std::size_t disjunct = 0;      // index of the disjunct that was satisfied
  MarkedTuple witness;           // values of its block variables
  std::vector<MarkedTuple> chunks; // per piece: anchor first, local ids, ancestor-closed
  int beta = 0;                  // level of the characteristic formulas used
};

/// Sentences theta_i with piece_i |= theta_i such that any tree whose pieces
/// satisfy them (over a tree-isomorphic tuple) satisfies f at that tuple.
/// `vars[k]` is the free variable standing for a[k]; a must be rooted,
/// ancestor-closed and duplicate-free, and f must hold at a.
ThetaResult theta_sentences(const FiniteTree& T, std::span<const NodeId> a, const FormulaPtr& f,
                            std::span<const VarId> vars);

} // namespace treebf
