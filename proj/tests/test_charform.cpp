#include "treebf/bf.hpp"
#include "treebf/charform.hpp"
#include "treebf/decomp.hpp"
#include "treebf/sample.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace treebf;

namespace {

const NodeId kRoot[] = {0};

bool holds_at(const FiniteTree& t, const FormulaPtr& f, std::span<const NodeId> tup) {
  Evaluator ev(t);
  return ev.eval(f, position_vars(tup.size()), tup);
}

MarkedTuple random_closed(const FiniteTree& t, std::mt19937_64& rng, int extra) {
  MarkedTuple tup{0};
  for (int k = 0; k < extra; ++k) {
    const auto v = static_cast<NodeId>(rng() % t.size());
    if (std::find(tup.begin(), tup.end(), v) == tup.end())
      tup.push_back(v);
  }
  return ancestor_closure(t, tup);
}

} // namespace

TEST_CASE("characteristic formulas hold at their own tuple") {
  std::mt19937_64 rng(51);
  for (int it = 0; it < 40; ++it) {
    const auto A = gen_random(1 + rng() % 6, rng());
    const auto a = random_closed(A, rng, 2);
    for (int n = 1; n <= 3; ++n)
      CHECK(holds_at(A, char_formula(A, a, n, static_cast<int>(A.size()) + 1), a));
  }
}

TEST_CASE("characteristic formulas agree with the game") {
  std::vector<FiniteTree> trees;
  for (std::size_t m = 1; m <= 5; ++m)
    for (auto& t : all_trees(m))
      trees.push_back(t);
  BfSolver solver;
  for (const auto& A : trees)
    for (int n = 1; n <= 3; ++n) {
      const auto f = char_formula(A, kRoot, n, static_cast<int>(A.size()) + 1);
      for (const auto& B : trees)
        CHECK(holds_at(B, f, kRoot) == solver.leq(A, kRoot, B, kRoot, n, Method::game));
    }
}

TEST_CASE("characteristic formulas agree with the game on longer tuples") {
  std::mt19937_64 rng(53);
  BfSolver solver;
  int compared = 0;
  for (int it = 0; it < 300; ++it) {
    const auto A = gen_random(1 + rng() % 6, rng());
    const auto B = gen_random(1 + rng() % 7, rng());
    const auto a = random_closed(A, rng, 2);
    const auto b = random_closed(B, rng, 2);
    if (a.size() != b.size())
      continue;
    ++compared;
    const int n = 1 + static_cast<int>(rng() % 2);
    const auto f = char_formula(A, a, n, static_cast<int>(A.size()) + 1);
    CHECK(holds_at(B, f, b) == solver.leq(A, a, B, b, n, Method::game));
  }
  CHECK(compared > 60);
}

TEST_CASE("block cap above the tree size changes nothing") {
  const auto A = parse_tree("((())())");
  for (int n = 1; n <= 3; ++n) {
    const auto f = char_formula(A, kRoot, n, 5);
    const auto g = char_formula(A, kRoot, n, 9);
    for (std::size_t m = 1; m <= 6; ++m)
      for (const auto& B : all_trees(m))
        CHECK(holds_at(B, f, kRoot) == holds_at(B, g, kRoot));
  }
}

TEST_CASE("characteristic formulas sit at A-level n") {
  std::mt19937_64 rng(57);
  for (int it = 0; it < 30; ++it) {
    const auto A = gen_random(1 + rng() % 7, rng());
    for (int n = 1; n <= 3; ++n) {
      const auto t = classify(char_formula(A, kRoot, n, static_cast<int>(A.size()) + 1));
      CHECK(t.a <= n);
      if (A.size() > static_cast<std::size_t>(n))
        CHECK(t.a == n);
    }
  }
}

TEST_CASE("characteristic formula preconditions") {
  const auto A = parse_tree("(()())");
  const NodeId open[] = {1};
  CHECK_THROWS_AS(char_formula(A, open, 1, 3), PreconditionError);
  CHECK_THROWS_AS(char_formula(A, kRoot, 0, 3), PreconditionError);
  CHECK_THROWS_AS(char_formula(A, kRoot, 1, 0), PreconditionError);
}

TEST_CASE("karp witness for a one-edge tree") {
  const auto A = parse_tree("()");
  const auto B = parse_tree("(())");
  CHECK_FALSE(karp_witness(B, kRoot, A, kRoot, 1).has_value());
  const auto w = karp_witness(A, kRoot, B, kRoot, 1);
  REQUIRE(w.has_value());
  CHECK(holds_at(A, *w, kRoot));
  CHECK_FALSE(holds_at(B, *w, kRoot));
  CHECK(classify(*w).a <= 1);
}

TEST_CASE("karp witnesses separate exactly the unrelated pairs") {
  std::mt19937_64 rng(59);
  BfSolver solver;
  for (int it = 0; it < 200; ++it) {
    const auto A = gen_random(1 + rng() % 6, rng());
    const auto B = gen_random(1 + rng() % 6, rng());
    const int n = 1 + static_cast<int>(rng() % 3);
    const auto w = karp_witness(A, kRoot, B, kRoot, n);
    CHECK(w.has_value() != solver.leq(A, kRoot, B, kRoot, n, Method::game));
    if (w) {
      CHECK(holds_at(A, *w, kRoot));
      CHECK_FALSE(holds_at(B, *w, kRoot));
      CHECK(classify(*w).a <= n);
    }
    CHECK_FALSE(karp_witness(A, kRoot, shuffle_labels(A, rng()), kRoot, n).has_value());
  }
}

TEST_CASE("sampled formulas never separate related pairs") {
  std::mt19937_64 rng(61);
  BfSolver solver;
  int related = 0, sampled = 0;
  for (int it = 0; it < 60; ++it) {
    const auto A = gen_random(1 + rng() % 5, rng());
    const auto B = gen_random(1 + rng() % 5, rng());
    const int n = 1 + static_cast<int>(rng() % 2);
    if (!solver.leq(A, kRoot, B, kRoot, n, Method::game))
      continue;
    ++related;
    const auto rep = karp_sample(A, kRoot, B, kRoot, n, 10, rng());
    CHECK(rep.distinguished == 0);
    CHECK_FALSE(rep.first_distinguishing.has_value());
    CHECK(rep.true_at_a <= rep.generated);
    sampled += rep.true_at_a;
  }
  CHECK(related > 10);
  CHECK(sampled > 10 * related / 2);
}

TEST_CASE("theta sentences for a simple existential") {
  const auto T = parse_tree("((())())");
  const MarkedTuple a{0, 1};
  const auto vars = position_vars(a.size());
  const auto f = parse_formula("(ex (y) (fand (parent x1 y) (not (= y x0))))");
  const auto res = theta_sentences(T, a, f, vars);
  REQUIRE(res.theta.size() == a.size());
  const auto views = decompose(T, a);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(res.theta[i]->free_vars() == std::vector<VarId>{kRootVar});
    CHECK(eval(views[i].piece, res.theta[i]));
  }
}

TEST_CASE("theta preconditions") {
  const auto T = parse_tree("((())())");
  const MarkedTuple a{0, 1};
  const auto vars = position_vars(a.size());
  CHECK_THROWS(theta_sentences(T, a, parse_formula("(ex (y) (parent y x0))"), vars));
  CHECK_THROWS(theta_sentences(T, MarkedTuple{0, 0}, parse_formula("(= x0 x0)"), vars));
  CHECK_THROWS(theta_sentences(T, a, parse_formula("(= x0 z)"), vars));
}

TEST_CASE("theta sentences transfer the formula") {
  std::mt19937_64 rng(67);
  FormulaSampler s(67, "t");
  int transferred = 0;
  for (int it = 0; it < 300; ++it) {
    const auto T = gen_random(2 + rng() % 5, rng());
    const auto a = random_closed(T, rng, 2);
    const auto vars = position_vars(a.size());
    const auto f = s.e_formula(1 + static_cast<int>(rng() % 2), vars);
    if (!holds_at(T, f, a))
      continue;
    const auto res = theta_sentences(T, a, f, vars);
    REQUIRE(res.theta.size() == a.size());
    // Fresh pieces, kept only when they satisfy their theta.
    std::vector<FiniteTree> pieces;
    bool all_ok = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto p = gen_random(1 + rng() % 5, rng());
      if (!eval(p, res.theta[i]))
        p = decompose(T, a)[i].piece;
      all_ok = all_ok && eval(p, res.theta[i]);
      pieces.push_back(std::move(p));
    }
    REQUIRE(all_ok);
    MarkedTuple glued;
    const auto S = reassemble(T, a, pieces, &glued);
    CHECK(holds_at(S, f, glued));
    ++transferred;
  }
  CHECK(transferred > 50);
}
