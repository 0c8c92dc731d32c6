#pragma once

#include "treebf/tree.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace treebf {

enum class Method { game, decomp, both };

Method parse_method(std::string_view name);
const char* method_name(Method m);

/// Raised by Method::both when the game search and the decomposition disagree.
class DiscrepancyError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// One round of a lost game: the structure Spoiler moved in, the extension
/// Spoiler played there, and the first response tried (if any was atomically
/// admissible) in the other structure.
struct TraceStep {
  int level = 0;
  char spoiler_side = 'R'; // 'L' or 'R': argument position of the structure Spoiler moves in
  MarkedTuple extension;
  std::optional<MarkedTuple> response;
};

struct BfVerdict {
  bool holds = false;
  int level = 0;
  std::vector<TraceStep> witness_trace;
};

/// Largest level at which a relation holds. `level == -1` when even the
/// atomic types differ; `reached_cap` when the relation holds at the cap.
struct LevelResult {
  int level = -1;
  bool reached_cap = false;
};

struct ScottRankResult {
  int rank = 0;
  bool reached_cap = false; // true means "rank >= cap"
  std::optional<std::pair<MarkedTuple, MarkedTuple>> witness_pair;
};

/// Memoized solver for the asymmetric back-and-forth relations between marked
/// finite trees. Caches are keyed by canonical codes and never change a
/// verdict; one instance must not be shared between threads.
class BfSolver {
public:
  /// (A, a) <=_n (B, b) after normalization (root appended when absent;
  /// ancestor closure for n >= 1).
  bool leq(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
           std::span<const NodeId> b, int n, Method method);

  BfVerdict verdict(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                    std::span<const NodeId> b, int n, Method method);

  /// Direct game search on the tuples as given: Spoiler plays extensions of
  /// pairwise distinct fresh nodes in B, Duplicator answers with distinct
  /// fresh nodes of A.
  bool game_leq(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                std::span<const NodeId> b, int n);

  /// Decomposition along rooted ancestor-closed tuples.
  bool decomp_leq(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                  std::span<const NodeId> b, int n);

  /// (P, root) <=_n (Q, root), solved recursively through decompositions.
  bool piece_leq(const FiniteTree& P, const FiniteTree& Q, int n);

  /// Failure path of a false game query, one step per level.
  std::vector<TraceStep> explain(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                                 std::span<const NodeId> b, int n);

  std::size_t game_cache_size() const noexcept { return game_memo_.size(); }
  std::size_t piece_cache_size() const noexcept { return piece_memo_.size(); }
  void clear();

private:
  bool game_rec(const FiniteTree& A, MarkedTuple& a, const FiniteTree& B, MarkedTuple& b, int n);
  // Searches responses for one extension; returns the first that wins.
  std::optional<MarkedTuple> respond(const FiniteTree& A, MarkedTuple& a, const FiniteTree& B,
                                     MarkedTuple& b, const MarkedTuple& ext, int n,
                                     std::optional<MarkedTuple>* first_admissible);

  std::unordered_map<std::string, bool> game_memo_;
  std::unordered_map<std::string, bool> piece_memo_;
};

/// Appends the root when absent and, for n >= 1, ancestor-closes.
MarkedTuple normalize_tuple(const FiniteTree& t, std::span<const NodeId> tuple, int n);

BfVerdict bf_leq(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                 std::span<const NodeId> b, int n, Method method = Method::both);

LevelResult bf_level(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                     std::span<const NodeId> b, int cap, Method method = Method::game);

/// Scott rank of a finite tree: 0 for the single-node tree, otherwise the
/// least n >= 1 such that <=_n between ancestor-closed tuples of T implies
/// that they are automorphic.
ScottRankResult scott_rank(const FiniteTree& t, int cap);

std::string format_verdict(const BfVerdict& v);

} // namespace treebf
