#include "treebf/decomp.hpp"
#include "treebf/formula.hpp"
#include "treebf/sample.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace treebf;

namespace {

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

TEST_CASE("formula text round trip") {
  for (const auto& entry : sentence_corpus()) {
    const auto f = parse_formula(entry.text);
    CHECK(to_string(f) == entry.text);
  }
  const char* extra[] = {"(eta 1 (x a b) #4)", "(neta 0 (y a) #2)", "(not (color 3 x))",
                         "(for (= x y) (not (parent x y)))", "(all () (root r))"};
  for (const char* s : extra)
    CHECK(to_string(parse_formula(s)) == s);
}

TEST_CASE("formula syntax errors") {
  CHECK_THROWS_AS(parse_formula("(not (and (= x x)))"), FormulaError);
  CHECK_THROWS_AS(parse_formula("(xor (= x x))"), FormulaError);
  CHECK_THROWS_AS(parse_formula("(= x"), FormulaError);
  CHECK_THROWS_AS(parse_formula("(ex (r) (= r r))"), FormulaError);
  CHECK_THROWS_AS(parse_formula("(eta 2 (x a b) #3)"), FormulaError);
  CHECK_THROWS_AS(parse_formula("(eta 0 (x a) #0)"), FormulaError);
  CHECK_THROWS_AS(parse_formula("(= x y) extra"), FormulaError);
}

TEST_CASE("free variables") {
  const auto f = parse_formula("(ex (x) (fand (parent r x) (= x y)))");
  const std::vector<VarId> expect = [] {
    std::vector<VarId> v{kRootVar, intern("y")};
    std::sort(v.begin(), v.end());
    return v;
  }();
  CHECK(f->free_vars() == expect);
}

TEST_CASE("classification base cases") {
  const auto atom = classify(parse_formula("(parent x y)"));
  CHECK(atom == ComplexityTag{1, 1, 1, 1, 1, 1});
  const auto ex = classify(parse_formula("(ex (x) (fand (parent r x) (not (root x))))"));
  CHECK(ex.sigma == 1);
  CHECK(ex.e == 1);
  CHECK(ex.pi == 2);
  const auto all = classify(parse_formula("(all (x) (root x))"));
  CHECK(all.pi == 1);
  CHECK(all.a == 1);
}

TEST_CASE("forall-or-and-exists is A2 but Pi4") {
  const auto t = classify(parse_formula(
      "(all (x) (or (and (ex (y) (parent x y)) (ex (y) (not (= x y)))) (and (ex (z) (parent z x)))))"));
  CHECK(t.a == 2);
  CHECK(t.pi == 4);
  CHECK(format_tag(t) == "sigma=5 pi=4\ne=3 a=2 ebar=3 abar=2\n");
}

TEST_CASE("classification corpus") {
  for (const auto& entry : sentence_corpus()) {
    CAPTURE(entry.text);
    const auto t = classify(parse_formula(entry.text));
    CHECK(t.e == entry.e);
    CHECK(t.a == entry.a);
  }
}

TEST_CASE("schemas classify as Sigma1 and Pi1") {
  const auto e = classify(parse_formula("(eta 0 (x a) #3)"));
  CHECK(e.sigma == 1);
  CHECK(e.e == 1);
  CHECK(e.a == 2);
  const auto n = classify(parse_formula("(neta 0 (x a) #3)"));
  CHECK(n.pi == 1);
  CHECK(n.a == 1);
  CHECK(n.e == 2);
}

TEST_CASE("hierarchy inclusions on random formulas") {
  FormulaSampler s(99);
  const std::vector<VarId> scope{intern("x0")};
  for (int it = 0; it < 400; ++it) {
    const auto f = s.any(4, scope);
    const auto t = classify(f);
    CHECK(t.e <= t.sigma);
    CHECK(t.a <= t.pi);
    CHECK(t.ebar <= t.e);
    CHECK(t.abar <= t.a);
    CHECK(t.a <= t.ebar + 1);
    CHECK(t.e <= t.abar + 1);
    // dual swaps the hierarchies
    const auto d = classify(dual(f));
    CHECK(d.sigma == t.pi);
    CHECK(d.e == t.a);
    CHECK(d.ebar == t.abar);
  }
  for (int n = 1; n <= 3; ++n)
    for (int it = 0; it < 100; ++it) {
      CHECK(classify(s.a_formula(n, scope)).a <= n);
      CHECK(classify(s.e_formula(n, scope)).e <= n);
    }
}

TEST_CASE("substituting lower-level subformulas does not raise the level") {
  // Replacing an atom by a formula of level 1 keeps a forall-exists at A-level 2.
  const auto low = classify(parse_formula("(all (x) (ex (y) (parent x y)))"));
  const auto sub = classify(parse_formula("(all (x) (ex (y) (fand (parent x y) (ex (z) (parent y z)))))"));
  CHECK(sub.a == low.a);
}

TEST_CASE("evaluation basics") {
  const auto f = parse_formula("(ex (x) (parent r x))");
  CHECK(eval(parse_tree("(())"), f));
  CHECK_FALSE(eval(parse_tree("()"), f));
  const auto g = parse_formula("(parent x y)");
  const auto t = parse_tree("((()))");
  CHECK(eval(t, g, {{"x", 1}, {"y", 2}}));
  CHECK_FALSE(eval(t, g, {{"x", 2}, {"y", 1}}));
  CHECK_THROWS_AS(eval(t, g, {{"x", 1}}), FormulaError);
  CHECK_THROWS_AS(eval(t, parse_formula("(color 1 r)")), FormulaError);
  const auto c = parse_colored_tree("{1{2}{3}}");
  CHECK(eval(c, parse_formula("(ex (x) (fand (parent r x) (color 3 x)))")));
  CHECK_FALSE(eval(c, parse_formula("(ex (x) (color 4 x))")));
}

TEST_CASE("dual negates") {
  FormulaSampler s(4);
  std::mt19937_64 rng(4);
  const std::vector<VarId> scope{intern("x0")};
  for (int it = 0; it < 300; ++it) {
    const auto t = gen_random(1 + rng() % 6, rng());
    const auto f = s.any(3, scope);
    const std::vector<NodeId> val{static_cast<NodeId>(rng() % t.size())};
    Evaluator ev(t);
    CHECK(ev.eval(f, scope, val) != ev.eval(dual(f), scope, val));
  }
}

TEST_CASE("eta on a small example") {
  const auto t = parse_tree("(()(()))");
  const auto a0 = intern("a0"), a1 = intern("a1"), x = intern("x");
  const std::vector<VarId> tv{a0, a1};
  const auto e0 = eta_formula(0, x, tv, 3);
  const auto e1 = eta_formula(1, x, tv, 3);
  auto at = [&](const FormulaPtr& f, NodeId v) {
    return eval(t, f, {{"a0", 0}, {"a1", 2}, {"x", v}});
  };
  CHECK(at(e0, 1));
  CHECK_FALSE(at(e1, 1));
  CHECK(at(e1, 3));
  CHECK_FALSE(at(e0, 3));
  CHECK(at(e0, 0));
  CHECK(at(e1, 2));
  CHECK_FALSE(at(e0, 2)); // a child of a0 equal to a1 is guarded out
  CHECK_THROWS_AS(eta_formula(2, x, tv, 3), FormulaError);
}

TEST_CASE("eta agrees with descendant trees and with its expansion") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 200; ++it) {
    const auto t = gen_random(1 + rng() % 9, rng());
    const auto a = random_closed(t, rng, 3);
    const auto tv = numbered_vars("a", a.size());
    const auto i = rng() % a.size();
    const auto x = intern("x");
    const auto f = eta_formula(static_cast<int>(i), x, tv, 1);
    const auto view = descendant_tree(t, a, i);
    std::vector<VarId> vars = tv;
    vars.push_back(x);
    std::vector<NodeId> vals(a.begin(), a.end());
    vals.push_back(0);
    Evaluator ev(t);
    const auto expanded = expand_schemas(f, t.size());
    const auto nf = neta(static_cast<int>(i), x, tv, 1);
    for (NodeId v = 0; v < static_cast<NodeId>(t.size()); ++v) {
      vals.back() = v;
      const bool member = std::find(view.origin.begin(), view.origin.end(), v) != view.origin.end();
      CHECK(ev.eval(f, vars, vals) == member);
      CHECK(ev.eval(expanded, vars, vals) == member);
      CHECK(ev.eval(nf, vars, vals) == !member);
    }
  }
}

TEST_CASE("relativization examples") {
  const auto some = parse_formula("(ex (x) (= x x))");
  const auto only_root = parse_formula("(all (x) (root x))");
  std::mt19937_64 rng(41);
  for (int it = 0; it < 200; ++it) {
    const auto t = gen_random(1 + rng() % 8, rng());
    const auto a = random_closed(t, rng, 3);
    const auto tv = numbered_vars("a", a.size());
    const auto i = rng() % a.size();
    Evaluator ev(t);
    CHECK(ev.eval(relativize(some, static_cast<int>(i), tv, 4), tv, a));
    const auto view = descendant_tree(t, a, i);
    CHECK(ev.eval(relativize(only_root, static_cast<int>(i), tv, 4), tv, a) == (view.piece.size() == 1));
  }
  const auto tv = numbered_vars("a", 2);
  CHECK_THROWS_AS(relativize(parse_formula("(ex (a0) (= a0 a0))"), 0, tv, 3), FormulaError);
  CHECK_THROWS_AS(relativize(parse_formula("(= y y)"), 0, tv, 3), FormulaError);
}

TEST_CASE("relativization identity on corpus and random sentences") {
  std::mt19937_64 rng(43);
  FormulaSampler s(43, "q");
  std::vector<FormulaPtr> formulas;
  for (const auto& entry : sentence_corpus())
    formulas.push_back(parse_formula(entry.text));
  for (int k = 0; k < 40; ++k)
    formulas.push_back(s.any(3, {}));
  for (int it = 0; it < 200; ++it) {
    const auto t = gen_random(1 + rng() % 8, rng());
    const auto a = random_closed(t, rng, 3);
    const auto tv = numbered_vars("a", a.size());
    const auto i = rng() % a.size();
    const auto view = descendant_tree(t, a, i);
    const auto& f = formulas[rng() % formulas.size()];
    const auto rel = relativize(f, static_cast<int>(i), tv, 2);
    CHECK(eval(t, rel, [&] {
      Assignment m;
      for (std::size_t k = 0; k < a.size(); ++k)
        m[var_name(tv[k])] = a[k];
      return m;
    }()) == eval(view.piece, f));
  }
}

TEST_CASE("relativization preserves E and A levels") {
  const auto tv = numbered_vars("a", 3);
  for (const auto& entry : sentence_corpus()) {
    CAPTURE(entry.text);
    const auto f = parse_formula(entry.text);
    for (int i = 0; i < 3; ++i) {
      const auto before = classify(f);
      const auto after = classify(relativize(f, i, tv, 3));
      CHECK(after.e == before.e);
      CHECK(after.a == before.a);
    }
  }
}

TEST_CASE("substitution") {
  const auto f = parse_formula("(fand (parent r x) (ex (y) (parent x y)))");
  const auto g = substitute(f, intern("x"), intern("z"));
  CHECK(to_string(g) == "(fand (parent r z) (ex (y) (parent z y)))");
  CHECK_THROWS_AS(substitute(f, intern("x"), intern("y")), FormulaError);
  CHECK(substitute(f, intern("w"), intern("y")) == f);
}
