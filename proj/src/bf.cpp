#include "treebf/bf.hpp"

#include "treebf/decomp.hpp"

#include <algorithm>
#include <map>

namespace treebf {

Method parse_method(std::string_view name) {
  if (name == "game")
    return Method::game;
  if (name == "decomp")
    return Method::decomp;
  if (name == "both")
    return Method::both;
  throw PreconditionError("unknown method '" + std::string(name) + "' (expected game, decomp or both)");
}

const char* method_name(Method m) {
  switch (m) {
  case Method::game:
    return "game";
  case Method::decomp:
    return "decomp";
  case Method::both:
    return "both";
  }
  return "?";
}

MarkedTuple normalize_tuple(const FiniteTree& t, std::span<const NodeId> tuple, int n) {
  check_tuple(t, tuple);
  MarkedTuple out(tuple.begin(), tuple.end());
  if (!is_rooted(out))
    out.push_back(0);
  if (n >= 1)
    out = ancestor_closure(t, out);
  return out;
}

namespace {

std::string memo_key(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                     std::span<const NodeId> b, int n) {
  std::string key = canonical_code(A, a);
  key += '|';
  key += canonical_code(B, b);
  key += '|';
  key += std::to_string(n);
  return key;
}

std::vector<NodeId> fresh_nodes(const FiniteTree& t, std::span<const NodeId> tuple) {
  std::vector<bool> used(t.size(), false);
  for (NodeId v : tuple)
    used[static_cast<std::size_t>(v)] = true;
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < t.size(); ++v)
    if (!used[v])
      out.push_back(static_cast<NodeId>(v));
  return out;
}

// Would appending x to ta (in X) and y to tb (in Y) keep the atomic types equal,
// given that they are equal before?
bool extends_atomically(const FiniteTree& X, std::span<const NodeId> ta, NodeId x, const FiniteTree& Y,
                        std::span<const NodeId> tb, NodeId y) {
  if ((x == 0) != (y == 0))
    return false;
  if ((X.parent(x) == 0) != (Y.parent(y) == 0))
    return false;
  if ((X.parent(x) == x) != (Y.parent(y) == y))
    return false;
  for (std::size_t j = 0; j < ta.size(); ++j) {
    if ((ta[j] == x) != (tb[j] == y))
      return false;
    if ((X.parent(ta[j]) == x) != (Y.parent(tb[j]) == y))
      return false;
    if ((X.parent(x) == ta[j]) != (Y.parent(y) == tb[j]))
      return false;
  }
  return true;
}

// Depth-first enumeration of ascending subsequences of `pool`, prefix first:
// this is lexicographic order on the resulting tuples.
template <class Fn>
bool all_subsequences(const std::vector<NodeId>& pool, Fn&& fn) {
  MarkedTuple cur;
  auto rec = [&](auto&& self, std::size_t from) -> bool {
    if (!fn(cur))
      return false;
    for (std::size_t i = from; i < pool.size(); ++i) {
      cur.push_back(pool[i]);
      const bool ok = self(self, i + 1);
      cur.pop_back();
      if (!ok)
        return false;
    }
    return true;
  };
  return rec(rec, 0);
}

// Rooted subtrees of t as ascending lists of their non-root nodes.
template <class Fn>
bool all_rooted_subtrees(const FiniteTree& t, Fn&& fn) {
  std::vector<bool> in(t.size(), false);
  in[0] = true;
  MarkedTuple cur;
  auto rec = [&](auto&& self, std::size_t v) -> bool {
    if (v == t.size())
      return fn(cur);
    if (!self(self, v + 1))
      return false;
    if (in[static_cast<std::size_t>(t.parent(static_cast<NodeId>(v)))]) {
      in[v] = true;
      cur.push_back(static_cast<NodeId>(v));
      const bool ok = self(self, v + 1);
      cur.pop_back();
      in[v] = false;
      if (!ok)
        return false;
    }
    return true;
  };
  return rec(rec, 1);
}

MarkedTuple concat(std::span<const NodeId> a, std::span<const NodeId> b) {
  MarkedTuple out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

} // namespace

void BfSolver::clear() {
  game_memo_.clear();
  piece_memo_.clear();
}

// ---------------------------------------------------------------------------
// Game search

bool BfSolver::game_leq(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                        std::span<const NodeId> b, int n) {
  if (n < 0)
    throw PreconditionError("level must be nonnegative");
  check_tuple(A, a);
  check_tuple(B, b);
  MarkedTuple ta(a.begin(), a.end()), tb(b.begin(), b.end());
  return game_rec(A, ta, B, tb, n);
}

std::optional<MarkedTuple> BfSolver::respond(const FiniteTree& A, MarkedTuple& a, const FiniteTree& B,
                                             MarkedTuple& b, const MarkedTuple& ext, int n,
                                             std::optional<MarkedTuple>* first_admissible) {
  const auto pool = fresh_nodes(A, a);
  std::vector<bool> used(pool.size(), false);
  const std::size_t base_a = a.size();
  const std::size_t base_b = b.size();
  std::optional<MarkedTuple> found;
  // a and b grow in lockstep as responses are chosen.
  auto rec = [&](auto&& self, std::size_t k) -> bool {
    if (k == ext.size()) {
      MarkedTuple response(a.begin() + static_cast<std::ptrdiff_t>(base_a), a.end());
      if (first_admissible && !*first_admissible)
        *first_admissible = response;
      if (game_rec(B, b, A, a, n - 1)) {
        found = std::move(response);
        return true;
      }
      return false;
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i])
        continue;
      if (!extends_atomically(A, a, pool[i], B, std::span<const NodeId>(b).first(base_b + k), ext[k]))
        continue;
      used[i] = true;
      a.push_back(pool[i]);
      b.push_back(ext[k]);
      const bool won = self(self, k + 1);
      b.pop_back();
      a.pop_back();
      used[i] = false;
      if (won)
        return true;
    }
    return false;
  };
  rec(rec, 0);
  return found;
}

bool BfSolver::game_rec(const FiniteTree& A, MarkedTuple& a, const FiniteTree& B, MarkedTuple& b, int n) {
  if (!same_atomic_type(A, a, B, b))
    return false;
  if (n == 0)
    return true;
  auto key = memo_key(A, a, B, b, n);
  if (auto it = game_memo_.find(key); it != game_memo_.end())
    return it->second;
  const auto pool = fresh_nodes(B, b);
  const bool holds = all_subsequences(pool, [&](const MarkedTuple& ext) {
    return respond(A, a, B, b, ext, n, nullptr).has_value();
  });
  game_memo_.emplace(std::move(key), holds);
  return holds;
}

std::vector<TraceStep> BfSolver::explain(const FiniteTree& A, std::span<const NodeId> a,
                                         const FiniteTree& B, std::span<const NodeId> b, int n) {
  std::vector<TraceStep> steps;
  const FiniteTree* left = &A;
  const FiniteTree* right = &B;
  MarkedTuple ta(a.begin(), a.end()), tb(b.begin(), b.end());
  char side = 'R';
  while (n > 0 && same_atomic_type(*left, ta, *right, tb)) {
    if (game_rec(*left, ta, *right, tb, n))
      break;
    TraceStep step;
    step.level = n;
    step.spoiler_side = side;
    const auto pool = fresh_nodes(*right, tb);
    all_subsequences(pool, [&](const MarkedTuple& ext) {
      std::optional<MarkedTuple> admissible;
      if (respond(*left, ta, *right, tb, ext, n, &admissible))
        return true;
      step.extension = ext;
      step.response = admissible;
      return false;
    });
    steps.push_back(step);
    if (!step.response)
      break;
    // The chosen response loses: continue in (right, tb·ext) <=_{n-1} (left, ta·resp).
    MarkedTuple next_left = concat(tb, step.extension);
    MarkedTuple next_right = concat(ta, *step.response);
    std::swap(left, right);
    ta = std::move(next_left);
    tb = std::move(next_right);
    side = side == 'R' ? 'L' : 'R';
    --n;
  }
  return steps;
}

// ---------------------------------------------------------------------------
// Decomposition

bool BfSolver::decomp_leq(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                          std::span<const NodeId> b, int n) {
  if (n < 0)
    throw PreconditionError("level must be nonnegative");
  if (n == 0)
    return same_atomic_type(A, a, B, b);
  require_rooted_closed(A, a, "decomp_leq");
  require_rooted_closed(B, b, "decomp_leq");
  if (!tuple_tree_isomorphic(A, a, B, b))
    return false;
  const auto pa = decompose(A, a);
  const auto pb = decompose(B, b);
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (!piece_leq(pa[i].piece, pb[i].piece, n))
      return false;
  return true;
}

bool BfSolver::piece_leq(const FiniteTree& P, const FiniteTree& Q, int n) {
  if (n == 0)
    return true;
  std::string key = canonical_code(P);
  key += '|';
  key += canonical_code(Q);
  key += '|';
  key += std::to_string(n);
  if (auto it = piece_memo_.find(key); it != piece_memo_.end())
    return it->second;

  // Spoiler plays rooted subtrees of Q; Duplicator copies their shape into P.
  const bool holds = all_rooted_subtrees(Q, [&](const MarkedTuple& ext) {
    std::vector<NodeId> image(Q.size(), -1);
    image[0] = 0;
    std::vector<bool> used(P.size(), false);
    used[0] = true;
    MarkedTuple resp;
    auto rec = [&](auto&& self, std::size_t k) -> bool {
      if (k == ext.size()) {
        if (n == 1)
          return true;
        MarkedTuple tq{0}, tp{0};
        tq.insert(tq.end(), ext.begin(), ext.end());
        tp.insert(tp.end(), resp.begin(), resp.end());
        const auto vq = decompose(Q, tq);
        const auto vp = decompose(P, tp);
        for (std::size_t i = 0; i < vq.size(); ++i)
          if (!piece_leq(vq[i].piece, vp[i].piece, n - 1))
            return false;
        return true;
      }
      const NodeId target_parent = image[static_cast<std::size_t>(Q.parent(ext[k]))];
      for (NodeId c : P.children(target_parent)) {
        if (used[static_cast<std::size_t>(c)])
          continue;
        used[static_cast<std::size_t>(c)] = true;
        image[static_cast<std::size_t>(ext[k])] = c;
        resp.push_back(c);
        const bool won = self(self, k + 1);
        resp.pop_back();
        image[static_cast<std::size_t>(ext[k])] = -1;
        used[static_cast<std::size_t>(c)] = false;
        if (won)
          return true;
      }
      return false;
    };
    return rec(rec, 0);
  });
  piece_memo_.emplace(std::move(key), holds);
  return holds;
}

// ---------------------------------------------------------------------------

bool BfSolver::leq(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                   std::span<const NodeId> b, int n, Method method) {
  if (n < 0)
    throw PreconditionError("level must be nonnegative");
  const auto na = normalize_tuple(A, a, n);
  const auto nb = normalize_tuple(B, b, n);
  switch (method) {
  case Method::game:
    return game_leq(A, na, B, nb, n);
  case Method::decomp:
    return decomp_leq(A, na, B, nb, n);
  case Method::both: {
    const bool g = game_leq(A, na, B, nb, n);
    const bool d = decomp_leq(A, na, B, nb, n);
    if (g != d)
      throw DiscrepancyError("game and decomposition disagree on " + serialize(A) + " [" +
                             format_tuple(na) + "] <=_" + std::to_string(n) + " " + serialize(B) +
                             " [" + format_tuple(nb) + "]: game=" + (g ? "true" : "false") +
                             " decomp=" + (d ? "true" : "false"));
    return g;
  }
  }
  return false;
}

BfVerdict BfSolver::verdict(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                            std::span<const NodeId> b, int n, Method method) {
  BfVerdict v;
  v.level = n;
  v.holds = leq(A, a, B, b, n, method);
  if (!v.holds)
    v.witness_trace = explain(A, normalize_tuple(A, a, n), B, normalize_tuple(B, b, n), n);
  return v;
}

BfVerdict bf_leq(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                 std::span<const NodeId> b, int n, Method method) {
  BfSolver solver;
  return solver.verdict(A, a, B, b, n, method);
}

LevelResult bf_level(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                     std::span<const NodeId> b, int cap, Method method) {
  if (cap < 0)
    throw PreconditionError("cap must be nonnegative");
  BfSolver solver;
  for (int n = 0; n <= cap; ++n)
    if (!solver.leq(A, a, B, b, n, method))
      return {n - 1, false};
  return {cap, true};
}

ScottRankResult scott_rank(const FiniteTree& t, int cap) {
  if (cap < 1)
    throw PreconditionError("scott_rank needs cap >= 1");
  ScottRankResult result;
  if (t.size() == 1)
    return result;

  // One representative per automorphism orbit of ancestor-closed tuples of
  // distinct nodes, grouped by length.
  std::map<std::size_t, std::map<CanonicalCode, MarkedTuple>> reps;
  std::vector<bool> used(t.size(), false);
  MarkedTuple cur;
  auto rec = [&](auto&& self) -> void {
    if (!cur.empty() && is_ancestor_closed(t, cur))
      reps[cur.size()].emplace(canonical_code(t, cur), cur);
    if (cur.size() == t.size())
      return;
    for (std::size_t v = 0; v < t.size(); ++v) {
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

  BfSolver solver;
  auto first_violation = [&](int n) -> std::optional<std::pair<MarkedTuple, MarkedTuple>> {
    for (const auto& [len, orbits] : reps) {
      for (const auto& [ca, ta] : orbits) {
        for (const auto& [cb, tb] : orbits) {
          if (ca == cb)
            continue;
          const bool related = n == 0 ? same_atomic_type(t, ta, t, tb) : solver.game_leq(t, ta, t, tb, n);
          if (related)
            return std::make_pair(ta, tb);
        }
      }
    }
    return std::nullopt;
  };

  auto previous = first_violation(0);
  for (int n = 1; n <= cap; ++n) {
    auto violation = first_violation(n);
    if (!violation) {
      result.rank = n;
      result.witness_pair = std::move(previous);
      return result;
    }
    previous = std::move(violation);
  }
  result.rank = cap;
  result.reached_cap = true;
  result.witness_pair = std::move(previous);
  return result;
}

std::string format_verdict(const BfVerdict& v) {
  std::string s = "holds=" + std::string(v.holds ? "true" : "false") + "\n";
  s += "level=" + std::to_string(v.level) + "\n";
  for (std::size_t i = 0; i < v.witness_trace.size(); ++i) {
    const auto& st = v.witness_trace[i];
    s += "trace." + std::to_string(i) + "=level:" + std::to_string(st.level) + " spoiler:" +
         st.spoiler_side + " extension:" + format_tuple(st.extension) +
         " response:" + (st.response ? format_tuple(*st.response) : std::string("none")) + "\n";
  }
  return s;
}

} // namespace treebf
