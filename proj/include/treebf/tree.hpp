#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace treebf {

using NodeId = int;

/// Ordered tuple of node ids of one tree. Repeats are allowed.
using MarkedTuple = std::vector<NodeId>;

/// Canonical byte string of an isomorphism class of a (colored, marked) tree.
using CanonicalCode = std::string;

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Thrown when an operation is called outside its documented domain.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A finite rooted tree given by a parent function over ids 0..size-1.
/// Node 0 is the root and parent(i) < i for every i >= 1.
class FiniteTree {
public:
  /// Single-node tree.
  FiniteTree() : FiniteTree(std::vector<NodeId>{-1}) {}

  /// `parents[0]` must be -1; `parents[i] < i` otherwise.
  explicit FiniteTree(std::vector<NodeId> parents);

  std::size_t size() const noexcept { return parent_.size(); }
  NodeId parent(NodeId v) const { return parent_[static_cast<std::size_t>(v)]; }
  const std::vector<NodeId>& parents() const noexcept { return parent_; }
  std::span<const NodeId> children(NodeId v) const {
    return children_[static_cast<std::size_t>(v)];
  }
  int depth(NodeId v) const { return depth_[static_cast<std::size_t>(v)]; }
  bool valid(NodeId v) const noexcept { return v >= 0 && static_cast<std::size_t>(v) < size(); }

  /// True when `anc` lies on the path from `v` to the root (inclusive).
  bool is_ancestor_or_self(NodeId anc, NodeId v) const;

  friend bool operator==(const FiniteTree& a, const FiniteTree& b) { return a.parent_ == b.parent_; }

private:
  std::vector<NodeId> parent_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<int> depth_;
};

/// Finite rooted tree with one natural-number color per node.
struct ColoredFiniteTree {
  FiniteTree tree;
  std::vector<std::uint64_t> color;

  ColoredFiniteTree() : color{0} {}
  ColoredFiniteTree(FiniteTree t, std::vector<std::uint64_t> c);

  std::size_t size() const noexcept { return tree.size(); }
};

// ---------------------------------------------------------------------------
// Text I/O.  Plain grammar:   tree ::= "(" tree* ")"
//            Colored grammar: tree ::= "{" NAT tree* "}"
// Whitespace is ignored. Nodes are numbered in depth-first preorder.

FiniteTree parse_tree(std::string_view text);
ColoredFiniteTree parse_colored_tree(std::string_view text);

/// Canonical serialization: children ordered by (distance to the nearest
/// leaf, canonical code).
std::string serialize(const FiniteTree& t);
std::string serialize(const ColoredFiniteTree& t);

// ---------------------------------------------------------------------------
// Canonization.  Codes are equal iff there is an isomorphism preserving
// colors and sending the i-th mark to the i-th mark.

CanonicalCode canonical_code(const FiniteTree& t, std::span<const NodeId> marks = {});
CanonicalCode canonical_code(const ColoredFiniteTree& t, std::span<const NodeId> marks = {});

bool are_isomorphic(const FiniteTree& a, const FiniteTree& b);

/// Same automorphism orbit (entrywise) within one tree.
bool automorphic(const FiniteTree& t, std::span<const NodeId> a, std::span<const NodeId> b);

/// Partition of k-tuples of pairwise distinct nodes into automorphism orbits.
/// Blocks are listed in order of their least member; members in lexicographic
/// order. With `ancestor_closed_only`, tuples whose node set is not closed
/// under parent are skipped.
std::vector<std::vector<MarkedTuple>> orbit_partition(const FiniteTree& t, int k,
                                                      bool ancestor_closed_only = false);

// ---------------------------------------------------------------------------
// Tuple utilities.

bool is_ancestor_closed(const FiniteTree& t, std::span<const NodeId> tuple);
bool is_rooted(std::span<const NodeId> tuple);
void check_tuple(const FiniteTree& t, std::span<const NodeId> tuple);

/// `t` followed by the missing ancestors of its entries, in ascending depth
/// (ties in order of discovery), without duplicates.
MarkedTuple ancestor_closure(const FiniteTree& t, std::span<const NodeId> tuple);

/// Atomic type agreement in the language {r, P}: entry equalities, parent
/// facts among entries, and parent/root facts involving the root constant.
bool same_atomic_type(const FiniteTree& a, std::span<const NodeId> ta, const FiniteTree& b,
                      std::span<const NodeId> tb);

/// Isomorphism of ancestor-closed tuples as finite trees, entrywise.
bool tuple_tree_isomorphic(const FiniteTree& a, std::span<const NodeId> ta, const FiniteTree& b,
                           std::span<const NodeId> tb);

/// All rooted ancestor-closed tuples whose first entry is the root and whose
/// remaining entries are distinct non-root nodes (at most `max_marks` of them),
/// in every order.
std::vector<MarkedTuple> rooted_closed_tuples(const FiniteTree& t, int max_marks);

// ---------------------------------------------------------------------------
// Generation.

/// Node i >= 1 receives a parent drawn uniformly from {0..i-1}.
FiniteTree gen_random(std::size_t n, std::uint64_t seed);
ColoredFiniteTree gen_random_colored(std::size_t n, std::uint64_t seed, std::uint64_t num_colors);

/// One representative per isomorphism class of trees with exactly n nodes,
/// ordered by canonical serialization.
std::vector<FiniteTree> all_trees(std::size_t n);

/// Relabels a tree along a random topological numbering (children shuffled).
FiniteTree shuffle_labels(const FiniteTree& t, std::uint64_t seed, std::vector<NodeId>* mapping = nullptr);

std::string format_tuple(std::span<const NodeId> tuple);
MarkedTuple parse_tuple(std::string_view text);

} // namespace treebf
