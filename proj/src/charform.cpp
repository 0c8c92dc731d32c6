#include "treebf/charform.hpp"

#include "treebf/bf.hpp"
#include "treebf/decomp.hpp"
#include "treebf/sample.hpp"

#include <algorithm>
#include <set>

namespace treebf {

std::vector<VarId> position_vars(std::size_t len) { return numbered_vars("x", len); }

std::vector<FormulaPtr> atomic_type_literals(const FiniteTree& t, std::span<const NodeId> tuple,
                                             std::span<const VarId> vars) {
  if (tuple.size() != vars.size())
    throw PreconditionError("atomic_type_literals: tuple and variable counts differ");
  check_tuple(t, tuple);
  std::vector<FormulaPtr> lits;
  const std::size_t L = tuple.size();
  for (std::size_t i = 0; i < L; ++i) {
    lits.push_back(is_root(vars[i], tuple[i] != 0));
    lits.push_back(parent_of(kRootVar, vars[i], !(tuple[i] != 0 && t.parent(tuple[i]) == 0)));
  }
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      if (i < j)
        lits.push_back(eq(vars[i], vars[j], tuple[i] != tuple[j]));
      if (i != j)
        lits.push_back(parent_of(vars[i], vars[j], !(tuple[j] != 0 && t.parent(tuple[j]) == tuple[i])));
    }
  }
  return lits;
}

// ---------------------------------------------------------------------------

CharFormulaBuilder::CharFormulaBuilder(const FiniteTree& A, int K) : A_(A), K_(K) {
  if (K < 1)
    throw PreconditionError("char_formula: K must be at least 1");
}

FormulaPtr CharFormulaBuilder::geq(std::span<const NodeId> a, int n) {
  check_tuple(A_, a);
  MarkedTuple t(a.begin(), a.end());
  return build(t, n, true);
}

FormulaPtr CharFormulaBuilder::leq(std::span<const NodeId> a, int n) {
  check_tuple(A_, a);
  MarkedTuple t(a.begin(), a.end());
  return build(t, n, false);
}

void CharFormulaBuilder::fresh_tuples(const MarkedTuple& a, std::size_t len,
                                      std::vector<MarkedTuple>& out) const {
  std::vector<bool> used(A_.size(), false);
  for (NodeId v : a)
    used[static_cast<std::size_t>(v)] = true;
  MarkedTuple cur;
  std::set<CanonicalCode> seen;
  auto rec = [&](auto&& self) -> void {
    if (cur.size() == len) {
      MarkedTuple full = a;
      full.insert(full.end(), cur.begin(), cur.end());
      if (seen.insert(canonical_code(A_, full)).second)
        out.push_back(cur);
      return;
    }
    for (std::size_t v = 0; v < A_.size(); ++v) {
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

// geq at level n:  atype & leq(a, n-1) & for k >= 1: forall y (guards | OR_c leq(ac, n-1))
// leq at level n:  atype & geq(a, n-1) & for each e: exists z geq(ae, n-1)
// Only pairwise distinct, fresh extensions need to be played: repeated or old
// entries are answered by copying.
FormulaPtr CharFormulaBuilder::build(MarkedTuple& a, int n, bool geq_dir) {
  std::string key = canonical_code(A_, a);
  key += '|';
  key += std::to_string(n);
  key += geq_dir ? '>' : '<';
  if (auto it = memo_.find(key); it != memo_.end())
    return it->second;

  const std::size_t L = a.size();
  const auto xs = position_vars(L + A_.size() + 1);
  const std::span<const VarId> own(xs.data(), L);
  std::vector<FormulaPtr> parts = atomic_type_literals(A_, a, own);
  if (n > 0) {
    parts.push_back(build(a, n - 1, !geq_dir));
    const std::size_t fresh = A_.size() - std::min(A_.size(), std::set<NodeId>(a.begin(), a.end()).size());
    if (geq_dir) {
      const std::size_t max_k = std::min<std::size_t>(static_cast<std::size_t>(K_), fresh + 1);
      for (std::size_t k = 1; k <= max_k; ++k) {
        std::vector<VarId> ys(xs.begin() + static_cast<std::ptrdiff_t>(L),
                              xs.begin() + static_cast<std::ptrdiff_t>(L + k));
        std::vector<FormulaPtr> alts;
        for (std::size_t i = 0; i < k; ++i) {
          for (std::size_t j = 0; j < i; ++j)
            alts.push_back(eq(ys[j], ys[i]));
          for (std::size_t j = 0; j < L; ++j)
            alts.push_back(eq(xs[j], ys[i]));
        }
        std::vector<MarkedTuple> exts;
        if (k <= fresh)
          fresh_tuples(a, k, exts);
        for (const auto& c : exts) {
          a.insert(a.end(), c.begin(), c.end());
          alts.push_back(build(a, n - 1, false));
          a.resize(L);
        }
        parts.push_back(forall(std::move(ys), disj(std::move(alts), true)));
      }
    } else {
      for (std::size_t k = 1; k <= fresh; ++k) {
        std::vector<MarkedTuple> exts;
        fresh_tuples(a, k, exts);
        std::vector<VarId> zs(xs.begin() + static_cast<std::ptrdiff_t>(L),
                              xs.begin() + static_cast<std::ptrdiff_t>(L + k));
        for (const auto& e : exts) {
          a.insert(a.end(), e.begin(), e.end());
          parts.push_back(exists(zs, build(a, n - 1, true)));
          a.resize(L);
        }
      }
    }
  }
  auto f = conj(std::move(parts), true);
  memo_.emplace(std::move(key), f);
  return f;
}

FormulaPtr char_formula(const FiniteTree& A, std::span<const NodeId> a, int n, int K) {
  if (n < 1)
    throw PreconditionError("char_formula: level must be at least 1");
  if (K < 1)
    throw PreconditionError("char_formula: K must be at least 1");
  require_rooted_closed(A, a, "char_formula");
  CharFormulaBuilder builder(A, K);
  return builder.geq(a, n);
}

std::optional<FormulaPtr> karp_witness(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                                       std::span<const NodeId> b, int n) {
  if (n < 1)
    throw PreconditionError("karp_witness: level must be at least 1");
  require_rooted_closed(A, a, "karp_witness");
  require_rooted_closed(B, b, "karp_witness");
  BfSolver solver;
  if (solver.leq(A, a, B, b, n, Method::game))
    return std::nullopt;
  return char_formula(A, a, n, static_cast<int>(B.size()));
}

KarpSampleReport karp_sample(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                             std::span<const NodeId> b, int n, int count, std::uint64_t seed) {
  if (a.size() != b.size())
    throw PreconditionError("karp_sample: tuples differ in length");
  KarpSampleReport rep;
  FormulaSampler sampler(seed, "v");
  const auto xs = position_vars(a.size());
  Evaluator ev_a(A), ev_b(B);
  for (int draw = 0; draw < 20 * count && rep.true_at_a < count; ++draw) {
    auto f = sampler.a_formula(n, xs);
    ++rep.generated;
    if (!ev_a.eval(f, xs, a))
      continue;
    ++rep.true_at_a;
    if (!ev_b.eval(f, xs, b)) {
      ++rep.distinguished;
      if (!rep.first_distinguishing)
        rep.first_distinguishing = f;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// theta sentences

namespace {

struct Disjunct {
  std::vector<VarId> block;
  FormulaPtr body;
};

// Pulls disjunctions and existential blocks to the top.
void flatten(const FormulaPtr& f, std::vector<VarId>& block, std::span<const VarId> tuple_vars,
             std::vector<Disjunct>& out) {
  if (f->kind() == Kind::disj) {
    for (const auto& c : f->children())
      flatten(c, block, tuple_vars, out);
    return;
  }
  if (f->kind() == Kind::exists) {
    bool clash = false;
    for (VarId v : f->vars())
      clash = clash || std::find(block.begin(), block.end(), v) != block.end() ||
              std::find(tuple_vars.begin(), tuple_vars.end(), v) != tuple_vars.end();
    if (!clash) {
      const std::size_t keep = block.size();
      block.insert(block.end(), f->vars().begin(), f->vars().end());
      flatten(f->children()[0], block, tuple_vars, out);
      block.resize(keep);
      return;
    }
  }
  out.push_back({block, f});
}

} // namespace

ThetaResult theta_sentences(const FiniteTree& T, std::span<const NodeId> a, const FormulaPtr& f,
                            std::span<const VarId> vars) {
  require_rooted_closed(T, a, "theta_sentences");
  if (vars.size() != a.size())
    throw PreconditionError("theta_sentences: one variable per tuple entry is required");
  if (std::set<NodeId>(a.begin(), a.end()).size() != a.size())
    throw PreconditionError("theta_sentences: tuple entries must be distinct");
  for (VarId v : f->free_vars())
    if (v != kRootVar && std::find(vars.begin(), vars.end(), v) == vars.end())
      throw PreconditionError("theta_sentences: free variable " + var_name(v) + " is not a tuple variable");

  Evaluator ev(T);
  if (!ev.eval(f, vars, a))
    throw PreconditionError("theta_sentences: lemma precondition unmet (formula is false at the tuple)");

  std::vector<Disjunct> disjuncts;
  std::vector<VarId> block;
  flatten(f, block, vars, disjuncts);

  ThetaResult res;
  bool found = false;
  std::vector<VarId> all_vars(vars.begin(), vars.end());
  std::vector<NodeId> all_vals(a.begin(), a.end());
  for (std::size_t k = 0; k < disjuncts.size() && !found; ++k) {
    const auto& d = disjuncts[k];
    all_vars.resize(a.size());
    all_vars.insert(all_vars.end(), d.block.begin(), d.block.end());
    all_vals.assign(a.begin(), a.end());
    all_vals.resize(all_vars.size(), 0);
    // Lexicographic enumeration of block values.
    while (true) {
      if (ev.eval(d.body, all_vars, all_vals)) {
        found = true;
        res.disjunct = k;
        res.witness.assign(all_vals.begin() + static_cast<std::ptrdiff_t>(a.size()), all_vals.end());
        res.beta = d.body->quantifier_free() ? 0 : classify(d.body).abar;
        break;
      }
      std::size_t pos = all_vals.size();
      while (pos > a.size() && all_vals[pos - 1] + 1 == static_cast<NodeId>(T.size()))
        all_vals[--pos] = 0;
      if (pos == a.size())
        break;
      ++all_vals[pos - 1];
    }
  }
  if (!found)
    throw std::logic_error("theta_sentences: no disjunct witnessed a true formula");

  const auto pieces = decompose(T, a);
  std::vector<NodeId> owner(T.size(), -1);
  std::vector<NodeId> local(T.size(), -1);
  for (std::size_t i = 0; i < pieces.size(); ++i)
    for (std::size_t k = 0; k < pieces[i].origin.size(); ++k) {
      owner[static_cast<std::size_t>(pieces[i].origin[k])] = static_cast<NodeId>(i);
      local[static_cast<std::size_t>(pieces[i].origin[k])] = static_cast<NodeId>(k);
    }
  res.chunks.assign(a.size(), MarkedTuple{0});
  for (NodeId c : res.witness) {
    auto& chunk = res.chunks[static_cast<std::size_t>(owner[static_cast<std::size_t>(c)])];
    const NodeId l = local[static_cast<std::size_t>(c)];
    if (std::find(chunk.begin(), chunk.end(), l) == chunk.end())
      chunk.push_back(l);
  }

  const int bound = static_cast<int>(T.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const FiniteTree& P = pieces[i].piece;
    auto& ci = res.chunks[i];
    ci = ancestor_closure(P, ci);
    const auto ws = numbered_vars("w", ci.size());
    std::vector<FormulaPtr> parts = atomic_type_literals(P, ci, ws);
    if (res.beta > 0) {
      const auto sub = decompose(P, ci);
      const VarId x0 = position_vars(1)[0];
      for (std::size_t j = 0; j < sub.size(); ++j) {
        const NodeId root[] = {0};
        auto chi = char_formula(sub[j].piece, root, res.beta, static_cast<int>(sub[j].piece.size()) + 1);
        chi = substitute(chi, x0, kRootVar);
        parts.push_back(relativize(chi, static_cast<int>(j), ws, bound));
      }
    }
    res.theta.push_back(exists(ws, conj(std::move(parts), true)));
  }
  return res;
}

} // namespace treebf
