#pragma once

#include "treebf/tree.hpp"

#include <span>
#include <string>
#include <vector>

namespace treebf {

/// The descendant tree of one marked node avoiding the others, together with
/// the embedding back into the ambient tree.
struct DescendantView {
  FiniteTree piece;
  std::vector<NodeId> origin; // piece id -> ambient id; origin[0] == anchor
  NodeId anchor = 0;
};

/// Nodes of `t` whose nearest marked ancestor-or-self is `tuple[i]`, with
/// `tuple[i]` as root. Requires a rooted ancestor-closed tuple.
DescendantView descendant_tree(const FiniteTree& t, std::span<const NodeId> tuple, std::size_t i);

/// One view per tuple index; views of distinct entries partition the nodes.
std::vector<DescendantView> decompose(const FiniteTree& t, std::span<const NodeId> tuple);

/// Inverse of `decompose` up to isomorphism: glue `pieces[i]` at the node
/// playing the role of `tuple[i]` in the finite tree spanned by `tuple`.
/// Pieces at repeated entries must be isomorphic; the first one is used.
/// On return `glued_tuple` holds the image of `tuple` in the result.
FiniteTree reassemble(const FiniteTree& pattern_tree, std::span<const NodeId> tuple,
                      std::span<const FiniteTree> pieces, MarkedTuple* glued_tuple = nullptr);

/// Throws unless `tuple` is rooted and ancestor-closed in `t`.
void require_rooted_closed(const FiniteTree& t, std::span<const NodeId> tuple, const char* who);

/// Line-oriented origin table: one "pieceId ambientId" pair per line.
std::string format_origin_table(const DescendantView& view);

} // namespace treebf
