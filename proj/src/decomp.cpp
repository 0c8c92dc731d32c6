#include "treebf/decomp.hpp"

#include <algorithm>
#include <map>

namespace treebf {

void require_rooted_closed(const FiniteTree& t, std::span<const NodeId> tuple, const char* who) {
  check_tuple(t, tuple);
  if (!is_rooted(tuple))
    throw PreconditionError(std::string(who) + ": tuple must contain the root");
  if (!is_ancestor_closed(t, tuple))
    throw PreconditionError(std::string(who) + ": tuple must be ancestor-closed");
}

namespace {

std::vector<bool> marked_set(const FiniteTree& t, std::span<const NodeId> tuple) {
  std::vector<bool> marked(t.size(), false);
  for (NodeId v : tuple)
    marked[static_cast<std::size_t>(v)] = true;
  return marked;
}

DescendantView extract(const FiniteTree& t, const std::vector<bool>& marked, NodeId anchor) {
  DescendantView view;
  view.anchor = anchor;
  std::vector<NodeId> local(t.size(), -1);
  std::vector<NodeId> parents;
  // Ambient ids are topological, so ascending order keeps parent < child.
  std::vector<NodeId> stack{anchor};
  std::vector<NodeId> members;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    members.push_back(v);
    for (NodeId c : t.children(v))
      if (!marked[static_cast<std::size_t>(c)])
        stack.push_back(c);
  }
  std::sort(members.begin(), members.end());
  for (NodeId v : members) {
    local[static_cast<std::size_t>(v)] = static_cast<NodeId>(view.origin.size());
    view.origin.push_back(v);
    parents.push_back(v == anchor ? -1 : local[static_cast<std::size_t>(t.parent(v))]);
  }
  view.piece = FiniteTree(std::move(parents));
  return view;
}

} // namespace

DescendantView descendant_tree(const FiniteTree& t, std::span<const NodeId> tuple, std::size_t i) {
  require_rooted_closed(t, tuple, "descendant_tree");
  if (i >= tuple.size())
    throw PreconditionError("descendant_tree: index " + std::to_string(i) + " out of range");
  return extract(t, marked_set(t, tuple), tuple[i]);
}

std::vector<DescendantView> decompose(const FiniteTree& t, std::span<const NodeId> tuple) {
  require_rooted_closed(t, tuple, "decompose");
  const auto marked = marked_set(t, tuple);
  std::vector<DescendantView> views;
  views.reserve(tuple.size());
  for (NodeId a : tuple)
    views.push_back(extract(t, marked, a));
  return views;
}

FiniteTree reassemble(const FiniteTree& pattern_tree, std::span<const NodeId> tuple,
                      std::span<const FiniteTree> pieces, MarkedTuple* glued_tuple) {
  require_rooted_closed(pattern_tree, tuple, "reassemble");
  if (pieces.size() != tuple.size())
    throw PreconditionError("reassemble: one piece per tuple entry is required");
  // Glue order: marked nodes in ascending ambient id, so parents precede children.
  std::vector<NodeId> distinct(tuple.begin(), tuple.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::map<NodeId, std::size_t> first_index;
  for (std::size_t i = tuple.size(); i-- > 0;)
    first_index[tuple[i]] = i;

  std::vector<NodeId> parents;
  std::map<NodeId, NodeId> new_id;
  // Emit each marked node, then the non-root part of its piece; piece node k
  // lands at base + k.
  for (NodeId v : distinct) {
    const auto id = static_cast<NodeId>(parents.size());
    new_id[v] = id;
    parents.push_back(v == 0 ? -1 : new_id.at(pattern_tree.parent(v)));
    const FiniteTree& piece = pieces[first_index.at(v)];
    const NodeId base = id;
    for (std::size_t k = 1; k < piece.size(); ++k) {
      const NodeId p = piece.parent(static_cast<NodeId>(k));
      parents.push_back(p == 0 ? base : base + p);
    }
  }
  if (glued_tuple) {
    glued_tuple->clear();
    for (NodeId v : tuple)
      glued_tuple->push_back(new_id.at(v));
  }
  return FiniteTree(std::move(parents));
}

std::string format_origin_table(const DescendantView& view) {
  std::string s;
  for (std::size_t k = 0; k < view.origin.size(); ++k)
    s += std::to_string(k) + " " + std::to_string(view.origin[k]) + "\n";
  return s;
}

} // namespace treebf
