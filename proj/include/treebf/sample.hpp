#pragma once

#include "treebf/formula.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace treebf {

/// Random formulas built by the closure rules of the E/A hierarchy, so each
/// result sits at or below the requested level. Bound variables get fresh
/// names "<prefix><k>".
class FormulaSampler {
public:
  explicit FormulaSampler(std::uint64_t seed, std::string prefix = "v");

  /// Quantifier-free finitary formula over `scope` (plus the root constant).
  FormulaPtr qf(const std::vector<VarId>& scope);
  /// Formula in the A hierarchy at level `n` (n >= 1).
  FormulaPtr a_formula(int n, const std::vector<VarId>& scope);
  /// Formula in the E hierarchy at level `n` (n >= 1).
  FormulaPtr e_formula(int n, const std::vector<VarId>& scope);
  /// A formula with no particular level (any NNF shape, both kinds of
  /// connectives).
  FormulaPtr any(int depth, const std::vector<VarId>& scope);

  std::mt19937_64& rng() noexcept { return rng_; }

private:
  FormulaPtr abar(int n, const std::vector<VarId>& scope);
  FormulaPtr ebar(int n, const std::vector<VarId>& scope);
  std::vector<VarId> fresh_block(std::vector<VarId>& scope);
  int pick(int lo, int hi);
  VarId pick_var(const std::vector<VarId>& scope);

  std::mt19937_64 rng_;
  std::string prefix_;
  int counter_ = 0;
};

/// Hand-built sentences used as a regression corpus; each entry is
/// (text, expected e-level, expected a-level).
struct CorpusEntry {
  const char* text;
  int e;
  int a;
};

const std::vector<CorpusEntry>& sentence_corpus();

} // namespace treebf
