#include "treebf/encode.hpp"

#include <algorithm>
#include <utility>

namespace treebf {

namespace {

class Encoder {
public:
  explicit Encoder(const ColoredFiniteTree& t) : t_(t) {}

  std::vector<NodeId> run() {
    std::vector<std::pair<NodeId, NodeId>> stack{{0, -1}}; // (source node, parent in output)
    while (!stack.empty()) {
      const auto [v, up] = stack.back();
      stack.pop_back();
      const NodeId root = add(up);
      const NodeId u1 = add(root);
      add(u1); // marker
      const NodeId u2 = add(u1);
      const NodeId u3 = add(u2);
      NodeId c = add(root);
      for (std::uint64_t k = 0; k < t_.color[static_cast<std::size_t>(v)]; ++k)
        c = add(c);
      for (int k = 0; k < GadgetLayout::fork_arity; ++k)
        add(c);
      for (NodeId w : t_.tree.children(v))
        stack.emplace_back(w, u3);
    }
    return std::move(parents_);
  }

private:
  NodeId add(NodeId parent) {
    parents_.push_back(parent);
    return static_cast<NodeId>(parents_.size() - 1);
  }

  const ColoredFiniteTree& t_;
  std::vector<NodeId> parents_;
};

bool is_leaf(const FiniteTree& t, NodeId v) { return t.children(v).empty(); }

// Length n of the spine starting at c (c0 .. cn), or -1.
long long spine_length(const FiniteTree& t, NodeId c) {
  long long n = 0;
  while (t.children(c).size() == 1) {
    c = t.children(c)[0];
    ++n;
  }
  const auto kids = t.children(c);
  if (kids.size() != static_cast<std::size_t>(GadgetLayout::fork_arity))
    return -1;
  for (NodeId k : kids)
    if (!is_leaf(t, k))
      return -1;
  return n;
}

// u3 when `u1` heads a content branch, else -1.
NodeId content_carrier(const FiniteTree& t, NodeId u1) {
  const auto kids = t.children(u1);
  if (kids.size() != 2)
    return -1;
  NodeId marker = kids[0], u2 = kids[1];
  if (!is_leaf(t, marker))
    std::swap(marker, u2);
  if (!is_leaf(t, marker) || t.children(u2).size() != 1)
    return -1;
  return t.children(u2)[0];
}

} // namespace

FiniteTree encode_colored(const ColoredFiniteTree& t) {
  const FiniteTree raw(Encoder(t).run());
  return parse_tree(serialize(raw));
}

ColoredFiniteTree decode(const FiniteTree& t) {
  std::vector<NodeId> parents;
  std::vector<std::uint64_t> colors;
  std::vector<std::pair<NodeId, NodeId>> stack{{0, -1}}; // (gadget root in t, parent in output)
  while (!stack.empty()) {
    const auto [g, up] = stack.back();
    stack.pop_back();
    const auto kids = t.children(g);
    if (kids.size() != 2)
      throw DecodeError(g);
    NodeId carrier = -1;
    long long color = -1;
    for (int side = 0; side < 2 && carrier < 0; ++side) {
      const NodeId head = kids[static_cast<std::size_t>(side)];
      const NodeId spine = kids[static_cast<std::size_t>(1 - side)];
      const NodeId u3 = content_carrier(t, head);
      const long long n = u3 >= 0 ? spine_length(t, spine) : -1;
      if (u3 >= 0 && n >= 0) {
        carrier = u3;
        color = n;
      }
    }
    if (carrier < 0)
      throw DecodeError(g);
    const auto self = static_cast<NodeId>(parents.size());
    parents.push_back(up);
    colors.push_back(static_cast<std::uint64_t>(color));
    const auto sub = t.children(carrier);
    for (auto it = sub.rbegin(); it != sub.rend(); ++it)
      stack.emplace_back(*it, self);
  }
  return ColoredFiniteTree(FiniteTree(std::move(parents)), std::move(colors));
}

bool in_image(const FiniteTree& t) {
  try {
    decode(t);
    return true;
  } catch (const DecodeError&) {
    return false;
  }
}

} // namespace treebf
