#include "treebf/sample.hpp"

namespace treebf {

FormulaSampler::FormulaSampler(std::uint64_t seed, std::string prefix)
    : rng_(seed), prefix_(std::move(prefix)) {}

int FormulaSampler::pick(int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng_);
}

VarId FormulaSampler::pick_var(const std::vector<VarId>& scope) {
  // The root constant is always available.
  const int k = pick(0, static_cast<int>(scope.size()));
  return k == static_cast<int>(scope.size()) ? kRootVar : scope[static_cast<std::size_t>(k)];
}

std::vector<VarId> FormulaSampler::fresh_block(std::vector<VarId>& scope) {
  std::vector<VarId> block;
  const int len = pick(1, 2);
  for (int i = 0; i < len; ++i) {
    block.push_back(intern(prefix_ + std::to_string(counter_++)));
    scope.push_back(block.back());
  }
  return block;
}

FormulaPtr FormulaSampler::qf(const std::vector<VarId>& scope) {
  const int len = pick(1, 3);
  std::vector<FormulaPtr> lits;
  for (int i = 0; i < len; ++i) {
    const bool neg = pick(0, 1) == 1;
    switch (pick(0, 3)) {
    case 0:
      lits.push_back(eq(pick_var(scope), pick_var(scope), neg));
      break;
    case 1:
    case 2:
      lits.push_back(parent_of(pick_var(scope), pick_var(scope), neg));
      break;
    default:
      lits.push_back(is_root(pick_var(scope), neg));
      break;
    }
  }
  if (lits.size() == 1)
    return lits.front();
  return pick(0, 1) ? conj(std::move(lits), true) : disj(std::move(lits), true);
}

FormulaPtr FormulaSampler::a_formula(int n, const std::vector<VarId>& scope) {
  const int parts = pick(1, 2);
  std::vector<FormulaPtr> out;
  for (int i = 0; i < parts; ++i) {
    auto inner = scope;
    auto block = fresh_block(inner);
    if (n == 1) {
      out.push_back(forall(std::move(block), qf(inner)));
    } else {
      const int beta = pick(1, n - 1);
      out.push_back(forall(std::move(block), ebar(beta, inner)));
    }
  }
  if (out.size() == 1)
    return out.front();
  return conj(std::move(out), pick(0, 1) == 1);
}

FormulaPtr FormulaSampler::e_formula(int n, const std::vector<VarId>& scope) {
  const int parts = pick(1, 2);
  std::vector<FormulaPtr> out;
  for (int i = 0; i < parts; ++i) {
    auto inner = scope;
    auto block = fresh_block(inner);
    if (n == 1) {
      out.push_back(exists(std::move(block), qf(inner)));
    } else {
      const int beta = pick(1, n - 1);
      out.push_back(exists(std::move(block), abar(beta, inner)));
    }
  }
  if (out.size() == 1)
    return out.front();
  return disj(std::move(out), pick(0, 1) == 1);
}

FormulaPtr FormulaSampler::ebar(int n, const std::vector<VarId>& scope) {
  const int parts = pick(1, 2);
  std::vector<FormulaPtr> out;
  for (int i = 0; i < parts; ++i)
    out.push_back(pick(0, 3) == 0 ? qf(scope) : e_formula(n, scope));
  if (out.size() == 1)
    return out.front();
  const bool finitary = pick(0, 1) == 1;
  return pick(0, 1) ? conj(std::move(out), finitary) : disj(std::move(out), finitary);
}

FormulaPtr FormulaSampler::abar(int n, const std::vector<VarId>& scope) {
  const int parts = pick(1, 2);
  std::vector<FormulaPtr> out;
  for (int i = 0; i < parts; ++i)
    out.push_back(pick(0, 3) == 0 ? qf(scope) : a_formula(n, scope));
  if (out.size() == 1)
    return out.front();
  const bool finitary = pick(0, 1) == 1;
  return pick(0, 1) ? conj(std::move(out), finitary) : disj(std::move(out), finitary);
}

FormulaPtr FormulaSampler::any(int depth, const std::vector<VarId>& scope) {
  if (depth <= 0)
    return qf(scope);
  switch (pick(0, 5)) {
  case 0:
  case 1: {
    std::vector<FormulaPtr> parts;
    const int len = pick(1, 3);
    for (int i = 0; i < len; ++i)
      parts.push_back(any(depth - 1, scope));
    const bool finitary = pick(0, 1) == 1;
    return pick(0, 1) ? conj(std::move(parts), finitary) : disj(std::move(parts), finitary);
  }
  case 2:
  case 3: {
    auto inner = scope;
    auto block = fresh_block(inner);
    return exists(std::move(block), any(depth - 1, inner));
  }
  case 4: {
    auto inner = scope;
    auto block = fresh_block(inner);
    return forall(std::move(block), any(depth - 1, inner));
  }
  default:
    return qf(scope);
  }
}

const std::vector<CorpusEntry>& sentence_corpus() {
  static const std::vector<CorpusEntry> corpus = {
      {"(ex (x) (= x x))", 1, 2},
      {"(all (x) (root x))", 2, 1},
      {"(ex (x) (parent r x))", 1, 2},
      {"(all (x) (ex (y) (parent x y)))", 3, 2},
      {"(ex (x) (all (y) (not (parent x y))))", 2, 3},
      {"(all (x) (or (and (ex (y) (parent x y)) (ex (y) (not (= x y)))) (and (ex (z) (parent z x)))))", 3, 2},
      {"(and (ex (x) (parent r x)) (all (y) (= y y)))", 3, 2},
      {"(fand (ex (x) (parent r x)) (all (y) (= y y)))", 2, 2},
      {"(or (ex (x) (all (y) (not (parent x y)))) (all (z) (root z)))", 2, 3},
      {"(ex (x y) (fand (parent r x) (parent x y) (all (z) (not (parent y z)))))", 2, 3},
      {"(all (x) (for (root x) (ex (y) (fand (parent y x) (all (z) (not (parent x z)))))))", 4, 3},
      {"(ex (x) (and (parent r x) (all (y) (or (not (parent x y)) (ex (z) (parent y z))))))", 3, 4},
  };
  return corpus;
}

} // namespace treebf
