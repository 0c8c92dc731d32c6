#pragma once

#include "treebf/tree.hpp"

#include <stdexcept>

namespace treebf {

/// Fixed layout of the colored-tree gadget.
struct GadgetLayout {
  static constexpr int content_depth = 3; // root -> u1 -> u2 -> u3
  static constexpr int marker_arity = 1;  // leaves under u1
  static constexpr int fork_arity = 2;    // leaves under the last spine node
};

class DecodeError : public std::runtime_error {
public:
  explicit DecodeError(NodeId node)
      : std::runtime_error("not in the image of \xCE\xA6 (node " + std::to_string(node) + ")"), node_(node) {}

  /// Node of the input where decoding gave up.
  NodeId node() const noexcept { return node_; }

private:
  NodeId node_;
};

/// Plain tree encoding a colored tree. Each node becomes a root with a
/// content branch u1(marker leaf, u2(u3(...children...))) and a color spine
/// c0 -> ... -> cn ending in two leaves, n the node's color. Node ids of the
/// result follow its canonical serialization.
FiniteTree encode_colored(const ColoredFiniteTree& t);

/// Inverse of encode_colored; throws DecodeError on anything outside its image.
ColoredFiniteTree decode(const FiniteTree& t);

/// True when decode succeeds.
bool in_image(const FiniteTree& t);

} // namespace treebf
