#include "treebf/tree.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>

namespace treebf {

FiniteTree::FiniteTree(std::vector<NodeId> parents) : parent_(std::move(parents)) {
  if (parent_.empty())
    throw PreconditionError("tree must have at least one node");
  if (parent_[0] != -1)
    throw PreconditionError("node 0 must be the root");
  children_.resize(parent_.size());
  depth_.assign(parent_.size(), 0);
  for (std::size_t i = 1; i < parent_.size(); ++i) {
    const NodeId p = parent_[i];
    if (p < 0 || static_cast<std::size_t>(p) >= i)
      throw PreconditionError("parent(" + std::to_string(i) + ") must be smaller than " +
                              std::to_string(i));
    children_[static_cast<std::size_t>(p)].push_back(static_cast<NodeId>(i));
    depth_[i] = depth_[static_cast<std::size_t>(p)] + 1;
  }
}

bool FiniteTree::is_ancestor_or_self(NodeId anc, NodeId v) const {
  while (v > anc)
    v = parent(v);
  return v == anc;
}

ColoredFiniteTree::ColoredFiniteTree(FiniteTree t, std::vector<std::uint64_t> c)
    : tree(std::move(t)), color(std::move(c)) {
  if (color.size() != tree.size())
    throw PreconditionError("every node needs exactly one color");
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class TreeParser {
public:
  TreeParser(std::string_view text, bool colored) : text_(text), colored_(colored) {}

  std::pair<std::vector<NodeId>, std::vector<std::uint64_t>> run() {
    skip_ws();
    if (pos_ == text_.size())
      throw ParseError("empty input", pos_);
    node(-1);
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("trailing characters after tree", pos_);
    return {std::move(parents_), std::move(colors_)};
  }

private:
  char open() const { return colored_ ? '{' : '('; }
  char close() const { return colored_ ? '}' : ')'; }

  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  void node(NodeId parent) {
    if (pos_ >= text_.size())
      throw ParseError("unbalanced brackets: unexpected end of input", pos_);
    if (text_[pos_] != open())
      throw ParseError(std::string("expected '") + open() + "'", pos_);
    ++pos_;
    const auto id = static_cast<NodeId>(parents_.size());
    parents_.push_back(parent);
    if (colored_) {
      skip_ws();
      colors_.push_back(color_literal());
    }
    for (;;) {
      skip_ws();
      if (pos_ >= text_.size())
        throw ParseError("unbalanced brackets: unexpected end of input", pos_);
      if (text_[pos_] == close()) {
        ++pos_;
        return;
      }
      node(id);
    }
  }

  std::uint64_t color_literal() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9')
      ++pos_;
    if (start == pos_)
      throw ParseError("bad color literal", start);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc{})
      throw ParseError("bad color literal", start);
    return value;
  }

  std::string_view text_;
  bool colored_;
  std::size_t pos_ = 0;
  std::vector<NodeId> parents_;
  std::vector<std::uint64_t> colors_;
};

// Bottom-up canonization shared by the plain and colored variants.
std::vector<std::string> subtree_codes(const FiniteTree& t, const std::vector<std::uint64_t>* colors,
                                       std::span<const NodeId> marks) {
  const std::size_t n = t.size();
  std::vector<std::vector<int>> marks_at(n);
  for (std::size_t i = 0; i < marks.size(); ++i) {
    if (!t.valid(marks[i]))
      throw PreconditionError("mark references node " + std::to_string(marks[i]) +
                              " outside the tree");
    marks_at[static_cast<std::size_t>(marks[i])].push_back(static_cast<int>(i));
  }
  std::vector<int> nearest_leaf(n, 0);
  std::vector<std::string> code(n);
  for (std::size_t k = n; k-- > 0;) {
    const auto v = static_cast<NodeId>(k);
    auto kids = t.children(v);
    std::vector<std::pair<int, const std::string*>> order;
    order.reserve(kids.size());
    int best = -1;
    for (NodeId c : kids) {
      const auto ci = static_cast<std::size_t>(c);
      order.emplace_back(nearest_leaf[ci], &code[ci]);
      best = best < 0 ? nearest_leaf[ci] : std::min(best, nearest_leaf[ci]);
    }
    nearest_leaf[k] = kids.empty() ? 0 : best + 1;
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first < y.first : *x.second < *y.second;
    });
    std::string s;
    if (colors) {
      s += '{';
      s += std::to_string((*colors)[k]);
    } else {
      s += '(';
    }
    if (!marks_at[k].empty()) {
      s += '[';
      for (std::size_t i = 0; i < marks_at[k].size(); ++i) {
        if (i)
          s += ',';
        s += std::to_string(marks_at[k][i]);
      }
      s += ']';
    }
    for (const auto& [_, c] : order)
      s += *c;
    s += colors ? '}' : ')';
    code[k] = std::move(s);
    for (NodeId c : kids)
      std::string().swap(code[static_cast<std::size_t>(c)]);
  }
  return code;
}

} // namespace

FiniteTree parse_tree(std::string_view text) {
  auto [parents, colors] = TreeParser(text, false).run();
  return FiniteTree(std::move(parents));
}

ColoredFiniteTree parse_colored_tree(std::string_view text) {
  auto [parents, colors] = TreeParser(text, true).run();
  return ColoredFiniteTree(FiniteTree(std::move(parents)), std::move(colors));
}

std::string serialize(const FiniteTree& t) { return canonical_code(t); }
std::string serialize(const ColoredFiniteTree& t) { return canonical_code(t); }

CanonicalCode canonical_code(const FiniteTree& t, std::span<const NodeId> marks) {
  return std::move(subtree_codes(t, nullptr, marks)[0]);
}

CanonicalCode canonical_code(const ColoredFiniteTree& t, std::span<const NodeId> marks) {
  return std::move(subtree_codes(t.tree, &t.color, marks)[0]);
}

bool are_isomorphic(const FiniteTree& a, const FiniteTree& b) {
  return a.size() == b.size() && canonical_code(a) == canonical_code(b);
}

bool automorphic(const FiniteTree& t, std::span<const NodeId> a, std::span<const NodeId> b) {
  return a.size() == b.size() && canonical_code(t, a) == canonical_code(t, b);
}

namespace {

template <class Fn>
void for_each_injective(std::size_t n, std::size_t k, Fn&& fn) {
  MarkedTuple cur;
  std::vector<bool> used(n, false);
  auto rec = [&](auto&& self) -> void {
    if (cur.size() == k) {
      fn(cur);
      return;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (used[v])
        continue;
      used[v] = true;
      cur.push_back(static_cast<NodeId>(v));
      self(self);
      cur.pop_back();
      used[v] = false;
    }
  };
  rec(rec);
}

} // namespace

std::vector<std::vector<MarkedTuple>> orbit_partition(const FiniteTree& t, int k,
                                                      bool ancestor_closed_only) {
  if (k < 0)
    throw PreconditionError("tuple length must be nonnegative");
  if (static_cast<std::size_t>(k) > t.size())
    throw PreconditionError("tuple length exceeds tree size");
  std::map<CanonicalCode, std::size_t> block_of;
  std::vector<std::vector<MarkedTuple>> blocks;
  for_each_injective(t.size(), static_cast<std::size_t>(k), [&](const MarkedTuple& tup) {
    if (ancestor_closed_only && !is_ancestor_closed(t, tup))
      return;
    auto code = canonical_code(t, tup);
    auto [it, inserted] = block_of.emplace(std::move(code), blocks.size());
    if (inserted)
      blocks.emplace_back();
    blocks[it->second].push_back(tup);
  });
  return blocks;
}

// ---------------------------------------------------------------------------
// Tuples

bool is_ancestor_closed(const FiniteTree& t, std::span<const NodeId> tuple) {
  for (NodeId v : tuple) {
    if (v == 0)
      continue;
    if (std::find(tuple.begin(), tuple.end(), t.parent(v)) == tuple.end())
      return false;
  }
  return true;
}

bool is_rooted(std::span<const NodeId> tuple) {
  return std::find(tuple.begin(), tuple.end(), 0) != tuple.end();
}

void check_tuple(const FiniteTree& t, std::span<const NodeId> tuple) {
  for (NodeId v : tuple)
    if (!t.valid(v))
      throw PreconditionError("tuple entry " + std::to_string(v) + " is not a node of a tree of size " +
                              std::to_string(t.size()));
}

MarkedTuple ancestor_closure(const FiniteTree& t, std::span<const NodeId> tuple) {
  check_tuple(t, tuple);
  MarkedTuple out(tuple.begin(), tuple.end());
  std::set<NodeId> seen(tuple.begin(), tuple.end());
  MarkedTuple missing;
  for (NodeId v : tuple) {
    for (NodeId u = v; u != 0;) {
      u = t.parent(u);
      if (seen.insert(u).second)
        missing.push_back(u);
    }
  }
  std::stable_sort(missing.begin(), missing.end(),
                   [&](NodeId x, NodeId y) { return t.depth(x) < t.depth(y); });
  out.insert(out.end(), missing.begin(), missing.end());
  return out;
}

bool same_atomic_type(const FiniteTree& a, std::span<const NodeId> ta, const FiniteTree& b,
                      std::span<const NodeId> tb) {
  if (ta.size() != tb.size())
    return false;
  const std::size_t m = ta.size();
  for (std::size_t i = 0; i < m; ++i) {
    const NodeId x = ta[i], y = tb[i];
    if ((x == 0) != (y == 0))
      return false;
    if ((a.parent(x) == 0) != (b.parent(y) == 0))
      return false;
    for (std::size_t j = 0; j < m; ++j) {
      if ((x == ta[j]) != (y == tb[j]))
        return false;
      if ((a.parent(ta[j]) == x) != (b.parent(tb[j]) == y))
        return false;
    }
  }
  return true;
}

bool tuple_tree_isomorphic(const FiniteTree& a, std::span<const NodeId> ta, const FiniteTree& b,
                           std::span<const NodeId> tb) {
  check_tuple(a, ta);
  check_tuple(b, tb);
  if (!is_ancestor_closed(a, ta) || !is_ancestor_closed(b, tb))
    throw PreconditionError("tuple_tree_isomorphic needs ancestor-closed tuples");
  if (ta.size() != tb.size())
    return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if ((ta[i] == 0) != (tb[i] == 0))
      return false;
    for (std::size_t j = 0; j < ta.size(); ++j) {
      if ((ta[i] == ta[j]) != (tb[i] == tb[j]))
        return false;
      if ((a.parent(ta[j]) == ta[i]) != (b.parent(tb[j]) == tb[i]))
        return false;
    }
  }
  return true;
}

std::vector<MarkedTuple> rooted_closed_tuples(const FiniteTree& t, int max_marks) {
  std::vector<MarkedTuple> out;
  const auto n = static_cast<NodeId>(t.size());
  // Closed sets grow by adding a node whose parent is already present; keep
  // them as sorted vectors to dedupe.
  std::set<std::vector<NodeId>> sets{{}};
  std::vector<std::vector<NodeId>> frontier{{}};
  for (int size = 1; size <= max_marks; ++size) {
    std::vector<std::vector<NodeId>> next;
    for (const auto& s : frontier) {
      for (NodeId v = 1; v < n; ++v) {
        if (std::binary_search(s.begin(), s.end(), v))
          continue;
        const NodeId p = t.parent(v);
        if (p != 0 && !std::binary_search(s.begin(), s.end(), p))
          continue;
        auto grown = s;
        grown.insert(std::upper_bound(grown.begin(), grown.end(), v), v);
        if (sets.insert(grown).second)
          next.push_back(std::move(grown));
      }
    }
    frontier = std::move(next);
  }
  for (const auto& s : sets) {
    auto perm = s;
    do {
      MarkedTuple tup{0};
      tup.insert(tup.end(), perm.begin(), perm.end());
      out.push_back(std::move(tup));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation

FiniteTree gen_random(std::size_t n, std::uint64_t seed) {
  if (n == 0)
    throw PreconditionError("a tree needs at least one node");
  std::mt19937_64 rng(seed);
  std::vector<NodeId> parents(n, -1);
  for (std::size_t i = 1; i < n; ++i)
    parents[i] = std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(i) - 1)(rng);
  return FiniteTree(std::move(parents));
}

ColoredFiniteTree gen_random_colored(std::size_t n, std::uint64_t seed, std::uint64_t num_colors) {
  if (n == 0)
    throw PreconditionError("a tree needs at least one node");
  if (num_colors == 0)
    throw PreconditionError("need at least one color");
  std::mt19937_64 rng(seed);
  std::vector<NodeId> parents(n, -1);
  for (std::size_t i = 1; i < n; ++i)
    parents[i] = std::uniform_int_distribution<NodeId>(0, static_cast<NodeId>(i) - 1)(rng);
  std::vector<std::uint64_t> colors(n);
  std::uniform_int_distribution<std::uint64_t> pick(0, num_colors - 1);
  for (auto& c : colors)
    c = pick(rng);
  return ColoredFiniteTree(FiniteTree(std::move(parents)), std::move(colors));
}

std::vector<FiniteTree> all_trees(std::size_t n) {
  if (n == 0)
    return {};
  std::map<std::string, FiniteTree> classes;
  std::vector<NodeId> parents(n, -1);
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      FiniteTree t(parents);
      classes.emplace(serialize(t), t);
      return;
    }
    for (NodeId p = 0; p < static_cast<NodeId>(i); ++p) {
      parents[i] = p;
      self(self, i + 1);
    }
  };
  rec(rec, 1);
  std::vector<FiniteTree> out;
  out.reserve(classes.size());
  for (auto& [_, t] : classes)
    out.push_back(parse_tree(serialize(t)));
  return out;
}

FiniteTree shuffle_labels(const FiniteTree& t, std::uint64_t seed, std::vector<NodeId>* mapping) {
  std::mt19937_64 rng(seed);
  std::vector<NodeId> new_id(t.size(), -1);
  std::vector<NodeId> parents;
  parents.reserve(t.size());
  auto visit = [&](auto&& self, NodeId v, NodeId new_parent) -> void {
    const auto id = static_cast<NodeId>(parents.size());
    new_id[static_cast<std::size_t>(v)] = id;
    parents.push_back(new_parent);
    std::vector<NodeId> kids(t.children(v).begin(), t.children(v).end());
    std::shuffle(kids.begin(), kids.end(), rng);
    for (NodeId c : kids)
      self(self, c, id);
  };
  visit(visit, 0, -1);
  if (mapping)
    *mapping = new_id;
  return FiniteTree(std::move(parents));
}

std::string format_tuple(std::span<const NodeId> tuple) {
  std::string s;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i)
      s += ',';
    s += std::to_string(tuple[i]);
  }
  return s;
}

MarkedTuple parse_tuple(std::string_view text) {
  MarkedTuple out;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && text[pos] == ' ')
      ++pos;
  };
  skip();
  if (pos == text.size())
    return out;
  for (;;) {
    skip();
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9')
      ++pos;
    if (start == pos)
      throw ParseError("expected node id", start);
    NodeId v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + pos, v);
    if (ec != std::errc{})
      throw ParseError("node id out of range", start);
    out.push_back(v);
    skip();
    if (pos == text.size())
      return out;
    if (text[pos] != ',')
      throw ParseError("expected ','", pos);
    ++pos;
  }
}

} // namespace treebf
