#include "oracle.hpp"

#include "treebf/bf.hpp"
#include "treebf/decomp.hpp"

#include <doctest.h>

#include <random>

using namespace treebf;

namespace {

const NodeId kRoot[] = {0};

MarkedTuple random_tuple(const FiniteTree& t, std::mt19937_64& rng, int len) {
  MarkedTuple tup;
  for (int k = 0; k < len; ++k)
    tup.push_back(static_cast<NodeId>(rng() % t.size()));
  return tup;
}

} // namespace

TEST_CASE("one node against one edge") {
  const auto x = parse_tree("()");
  const auto y = parse_tree("(())");
  CHECK_FALSE(bf_leq(x, kRoot, y, kRoot, 1).holds);
  CHECK(bf_leq(y, kRoot, x, kRoot, 1).holds);
  CHECK_FALSE(bf_leq(y, kRoot, x, kRoot, 2).holds);
  CHECK(bf_leq(x, kRoot, y, kRoot, 0).holds);
  const auto lv = bf_level(y, kRoot, x, kRoot, 4);
  CHECK(lv.level == 1);
  CHECK_FALSE(lv.reached_cap);
  CHECK(bf_level(x, kRoot, y, kRoot, 4).level == 0);
}

TEST_CASE("paths of three and two edges") {
  // Frozen from the brute-force game of tests/oracle.hpp.
  const auto a = parse_tree("(((())))");
  const auto b = parse_tree("((()))");
  CHECK(bf_level(a, kRoot, b, kRoot, 5).level == 1);
  CHECK(bf_level(b, kRoot, a, kRoot, 5).level == 0);
  oracle::NaiveGame naive;
  for (int n = 0; n <= 3; ++n) {
    CHECK(bf_leq(a, kRoot, b, kRoot, n).holds == naive.leq(a, {0}, b, {0}, n));
    CHECK(bf_leq(b, kRoot, a, kRoot, n).holds == naive.leq(b, {0}, a, {0}, n));
  }
}

TEST_CASE("isomorphic pairs reach the cap") {
  const auto t = parse_tree("((())(()()))");
  const auto u = shuffle_labels(t, 5);
  const auto lv = bf_level(t, kRoot, u, kRoot, 3, Method::both);
  CHECK(lv.reached_cap);
  CHECK(lv.level == 3);
}

TEST_CASE("normalization") {
  const auto t = parse_tree("((()))");
  const NodeId deep[] = {2};
  CHECK(normalize_tuple(t, deep, 0) == MarkedTuple{2, 0});
  CHECK(normalize_tuple(t, deep, 1) == MarkedTuple{2, 0, 1});
  const NodeId with_root[] = {0, 2};
  CHECK(normalize_tuple(t, with_root, 0) == MarkedTuple{0, 2});
}

TEST_CASE("game search matches the naive definition") {
  std::mt19937_64 rng(3);
  oracle::NaiveGame naive;
  BfSolver solver;
  std::vector<FiniteTree> trees;
  for (int i = 0; i < 14; ++i)
    trees.push_back(gen_random(1 + rng() % 4, rng()));
  for (int it = 0; it < 300; ++it) {
    const auto& A = trees[rng() % trees.size()];
    const auto& B = trees[rng() % trees.size()];
    const int len = static_cast<int>(rng() % 3);
    const auto a = random_tuple(A, rng, len);
    const auto b = random_tuple(B, rng, len);
    const int n = static_cast<int>(rng() % 3);
    CHECK(solver.game_leq(A, a, B, b, n) == naive.leq(A, a, B, b, n));
  }
}

TEST_CASE("game and decomposition agree on small trees") {
  std::vector<FiniteTree> trees;
  for (std::size_t n = 1; n <= 4; ++n)
    for (auto& t : all_trees(n))
      trees.push_back(t);
  BfSolver solver;
  for (const auto& A : trees)
    for (const auto& B : trees)
      for (const auto& a : rooted_closed_tuples(A, 2))
        for (const auto& b : rooted_closed_tuples(B, 2)) {
          if (a.size() != b.size())
            continue;
          for (int n = 1; n <= 3; ++n)
            CHECK(solver.game_leq(A, a, B, b, n) == solver.decomp_leq(A, a, B, b, n));
        }
}

TEST_CASE("nestedness, reflexivity and transitivity") {
  std::mt19937_64 rng(5);
  BfSolver solver;
  std::vector<FiniteTree> trees;
  for (int i = 0; i < 12; ++i)
    trees.push_back(gen_random(1 + rng() % 5, rng()));
  for (const auto& A : trees) {
    for (int n = 0; n <= 3; ++n)
      CHECK(solver.leq(A, kRoot, A, kRoot, n, Method::game));
    for (const auto& B : trees) {
      bool prev = true;
      for (int n = 0; n <= 3; ++n) {
        const bool now = solver.leq(A, kRoot, B, kRoot, n, Method::game);
        CHECK((prev || !now)); // holds at n implies holds below n
        prev = now;
      }
      for (const auto& C : trees)
        for (int n = 1; n <= 2; ++n)
          if (solver.leq(A, kRoot, B, kRoot, n, Method::game) && solver.leq(B, kRoot, C, kRoot, n, Method::game))
            CHECK(solver.leq(A, kRoot, C, kRoot, n, Method::game));
    }
  }
}

TEST_CASE("ancestor closure preserves the relation") {
  std::mt19937_64 rng(9);
  BfSolver solver;
  int compared = 0;
  for (int it = 0; it < 500; ++it) {
    const auto A = gen_random(1 + rng() % 5, rng());
    const auto B = gen_random(1 + rng() % 5, rng());
    const auto a = random_tuple(A, rng, 2);
    const auto b = random_tuple(B, rng, 2);
    const int n = 1 + static_cast<int>(rng() % 2);
    const auto ca = ancestor_closure(A, a);
    const auto cb = ancestor_closure(B, b);
    if (ca.size() != cb.size())
      continue;
    ++compared;
    CHECK(solver.game_leq(A, a, B, b, n) == solver.game_leq(A, ca, B, cb, n));
  }
  CHECK(compared > 100);
}

TEST_CASE("verdicts are isomorphism invariant") {
  std::mt19937_64 rng(21);
  BfSolver solver;
  for (int it = 0; it < 80; ++it) {
    const auto A = gen_random(1 + rng() % 6, rng());
    const auto B = gen_random(1 + rng() % 6, rng());
    std::vector<NodeId> map_a, map_b;
    const auto A2 = shuffle_labels(A, rng(), &map_a);
    const auto B2 = shuffle_labels(B, rng(), &map_b);
    const auto a = random_tuple(A, rng, 1);
    const auto b = random_tuple(B, rng, 1);
    const MarkedTuple a2{map_a[static_cast<std::size_t>(a[0])]};
    const MarkedTuple b2{map_b[static_cast<std::size_t>(b[0])]};
    const int n = static_cast<int>(rng() % 3);
    CHECK(solver.leq(A, a, B, b, n, Method::game) == solver.leq(A2, a2, B2, b2, n, Method::game));
  }
}

TEST_CASE("automorphic tuples are related at every level") {
  const auto t = parse_tree("((()())(()()))");
  BfSolver solver;
  for (const auto& block : orbit_partition(t, 2))
    for (const auto& x : block)
      for (const auto& y : block)
        for (int n = 0; n <= 2; ++n)
          CHECK(solver.leq(t, x, t, y, n, Method::game));
}

TEST_CASE("method both and the trace of a failure") {
  const auto x = parse_tree("()");
  const auto y = parse_tree("(())");
  const auto v = bf_leq(x, kRoot, y, kRoot, 1, Method::both);
  CHECK_FALSE(v.holds);
  REQUIRE(v.witness_trace.size() == 1);
  CHECK(v.witness_trace[0].spoiler_side == 'R');
  CHECK(v.witness_trace[0].extension == MarkedTuple{1});
  CHECK_FALSE(v.witness_trace[0].response.has_value());
  CHECK(format_verdict(v) == "holds=false\nlevel=1\ntrace.0=level:1 spoiler:R extension:1 response:none\n");

  // Two-level failure: Spoiler plays the empty extension, then the child.
  const auto w = bf_leq(y, kRoot, x, kRoot, 2, Method::both);
  CHECK_FALSE(w.holds);
  REQUIRE(w.witness_trace.size() == 2);
  CHECK(w.witness_trace[0].extension.empty());
  CHECK(w.witness_trace[0].response == MarkedTuple{});
  CHECK(w.witness_trace[1].spoiler_side == 'L');
  CHECK(w.witness_trace[1].extension == MarkedTuple{1});
}

TEST_CASE("method names") {
  CHECK(parse_method("game") == Method::game);
  CHECK(parse_method("decomp") == Method::decomp);
  CHECK(parse_method("both") == Method::both);
  CHECK_THROWS(parse_method("magic"));
  CHECK(std::string(method_name(Method::decomp)) == "decomp");
}

TEST_CASE("scott ranks") {
  CHECK(scott_rank(parse_tree("()"), 3).rank == 0);
  CHECK(scott_rank(parse_tree("(())"), 3).rank == 1);
  CHECK(scott_rank(parse_tree("(()())"), 3).rank == 1);
  CHECK_THROWS_AS(scott_rank(parse_tree("()"), 0), PreconditionError);
}

TEST_CASE("scott ranks match the brute-force orbit criterion") {
  for (std::size_t n = 1; n <= 4; ++n)
    for (const auto& t : all_trees(n))
      CHECK(scott_rank(t, 3).rank == oracle::scott_rank(t, 3));
}

TEST_CASE("scott rank is isomorphism invariant and below |T| + 1") {
  for (std::size_t n = 1; n <= 6; ++n)
    for (const auto& t : all_trees(n)) {
      const int cap = static_cast<int>(t.size()) + 1;
      const auto r = scott_rank(t, cap);
      CHECK_FALSE(r.reached_cap);
      CHECK(scott_rank(shuffle_labels(t, n), cap).rank == r.rank);
    }
}
