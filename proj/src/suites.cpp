#include "treebf/suites.hpp"

#include "treebf/bf.hpp"
#include "treebf/charform.hpp"
#include "treebf/decomp.hpp"
#include "treebf/encode.hpp"
#include "treebf/formula.hpp"
#include "treebf/sample.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace treebf {

namespace {

constexpr std::size_t kReportedFailures = 10;

// Formula from the hierarchy discussion: universal over a countable
// disjunction of countable conjunctions of existentials.
constexpr const char* kAllOrAndEx =
    "(all (x) (or (and (ex (y) (parent x y)) (ex (y) (not (= x y)))) (and (ex (z) (parent z x)))))";

std::string tup(std::span<const NodeId> t) { return "[" + format_tuple(MarkedTuple(t.begin(), t.end())) + "]"; }

std::string where(const FiniteTree& A, std::span<const NodeId> a, const FiniteTree& B,
                  std::span<const NodeId> b, int n) {
  return serialize(A) + tup(a) + " vs " + serialize(B) + tup(b) + " n=" + std::to_string(n);
}

std::vector<FiniteTree> trees_up_to(int max_size) {
  std::vector<FiniteTree> out;
  for (std::size_t m = 1; m <= static_cast<std::size_t>(std::max(1, max_size)); ++m)
    for (auto& t : all_trees(m))
      out.push_back(std::move(t));
  return out;
}

FiniteTree random_tree(std::mt19937_64& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(std::max(0, hi - lo) + 1);
  return gen_random(static_cast<std::size_t>(lo) + rng() % span, rng());
}

// Root first, then the closure of up to `extra` random nodes.
MarkedTuple random_closed(const FiniteTree& t, std::mt19937_64& rng, int extra) {
  MarkedTuple a{0};
  for (int k = 0; k < extra; ++k) {
    const auto v = static_cast<NodeId>(rng() % t.size());
    if (std::find(a.begin(), a.end(), v) == a.end())
      a.push_back(v);
  }
  return ancestor_closure(t, a);
}

MarkedTuple random_raw(const FiniteTree& t, std::mt19937_64& rng, int len) {
  MarkedTuple a;
  for (int k = 0; k < len; ++k)
    a.push_back(static_cast<NodeId>(rng() % t.size()));
  return a;
}

bool holds_at(const FiniteTree& t, const FormulaPtr& f, std::span<const NodeId> a) {
  Evaluator ev(t);
  return ev.eval(f, position_vars(a.size()), a);
}

// --- lemma31 ---------------------------------------------------------------

CaseResult lemma31_case(const SuiteOptions& o, std::size_t idx) {
  const auto trees = trees_up_to(o.max_size);
  const auto& A = trees[idx / trees.size()];
  const auto& B = trees[idx % trees.size()];
  BfSolver solver;
  CaseResult r;
  const auto ta = rooted_closed_tuples(A, 3);
  const auto tb = rooted_closed_tuples(B, 3);
  for (const auto& a : ta)
    for (const auto& b : tb) {
      if (a.size() != b.size())
        continue;
      for (int n = 0; n <= o.max_level; ++n) {
        const bool g = solver.game_leq(A, a, B, b, n);
        const bool d = solver.decomp_leq(A, a, B, b, n);
        r.expect(g == d, "game " + std::to_string(g) + " decomp " + std::to_string(d) + " at " + where(A, a, B, b, n));
      }
    }
  return r;
}

// --- ancestor / nested -----------------------------------------------------

struct RawInstance {
  FiniteTree A, B;
  MarkedTuple a, b;
};

// Non-closed tuples whose closures have equal length.
RawInstance raw_instance(const SuiteOptions& o, std::size_t idx) {
  std::mt19937_64 rng(case_seed(o.seed, idx));
  while (true) {
    RawInstance x{random_tree(rng, 2, o.max_size), random_tree(rng, 2, o.max_size), {}, {}};
    const int len = 1 + static_cast<int>(rng() % 3);
    x.a = random_raw(x.A, rng, len);
    x.b = random_raw(x.B, rng, len);
    if (is_ancestor_closed(x.A, x.a) && is_ancestor_closed(x.B, x.b))
      continue;
    if (ancestor_closure(x.A, x.a).size() != ancestor_closure(x.B, x.b).size())
      continue;
    return x;
  }
}

CaseResult ancestor_case(const SuiteOptions& o, std::size_t idx) {
  const auto x = raw_instance(o, idx);
  const auto ca = ancestor_closure(x.A, x.a);
  const auto cb = ancestor_closure(x.B, x.b);
  BfSolver solver;
  CaseResult r;
  for (int n = 1; n <= std::max(1, o.max_level); ++n) {
    const bool raw = solver.game_leq(x.A, x.a, x.B, x.b, n);
    const bool closed = solver.game_leq(x.A, ca, x.B, cb, n);
    r.expect(raw == closed, "closure changed the verdict at " + where(x.A, x.a, x.B, x.b, n));
  }
  return r;
}

CaseResult nested_case(const SuiteOptions& o, std::size_t idx) {
  const auto x = raw_instance(o, idx);
  const auto ca = ancestor_closure(x.A, x.a);
  const auto cb = ancestor_closure(x.B, x.b);
  BfSolver solver;
  CaseResult r;
  for (int n = 1; n <= std::max(1, o.max_level); ++n) {
    r.expect(!solver.game_leq(x.A, x.a, x.B, x.b, n) || solver.game_leq(x.A, x.a, x.B, x.b, n - 1),
             "not nested at " + where(x.A, x.a, x.B, x.b, n));
    r.expect(!solver.game_leq(x.A, ca, x.B, cb, n) || solver.game_leq(x.A, ca, x.B, cb, n - 1),
             "not nested at " + where(x.A, ca, x.B, cb, n));
  }
  return r;
}

// --- charform / karp -------------------------------------------------------

struct ClosedInstance {
  FiniteTree A, B;
  MarkedTuple a, b;
  int n = 1;
};

ClosedInstance closed_instance(const SuiteOptions& o, std::size_t idx, int max_size) {
  std::mt19937_64 rng(case_seed(o.seed, idx));
  const int n = 1 + static_cast<int>(idx % static_cast<std::size_t>(std::max(1, o.max_level)));
  while (true) {
    ClosedInstance x{random_tree(rng, 1, max_size), random_tree(rng, 1, max_size), {}, {}, n};
    // Every other instance compares A with a relabeled copy, so related
    // pairs are well represented.
    if (idx % 2 == 1) {
      std::vector<NodeId> map;
      x.B = shuffle_labels(x.A, rng(), &map);
      x.a = random_closed(x.A, rng, static_cast<int>(rng() % 3));
      for (NodeId v : x.a)
        x.b.push_back(map[static_cast<std::size_t>(v)]);
      if (rng() % 2 == 0)
        x.b = random_closed(x.B, rng, static_cast<int>(rng() % 3));
    } else {
      x.a = random_closed(x.A, rng, static_cast<int>(rng() % 3));
      x.b = random_closed(x.B, rng, static_cast<int>(rng() % 3));
    }
    if (x.a.size() == x.b.size())
      return x;
  }
}

CaseResult charform_case(const SuiteOptions& o, std::size_t idx) {
  const auto x = closed_instance(o, idx, std::min(o.max_size, 6));
  BfSolver solver;
  CaseResult r;
  const auto psi = char_formula(x.A, x.a, x.n, static_cast<int>(x.B.size()));
  const bool game = solver.game_leq(x.A, x.a, x.B, x.b, x.n);
  r.expect(holds_at(x.B, psi, x.b) == game, "formula disagrees with the game at " + where(x.A, x.a, x.B, x.b, x.n));
  r.expect(holds_at(x.A, psi, x.a), "formula false at its own tuple " + where(x.A, x.a, x.A, x.a, x.n));
  r.expect(classify(psi).a <= x.n, "A-level above n at " + where(x.A, x.a, x.B, x.b, x.n));
  return r;
}

constexpr int kKarpSamples = 200;

CaseResult karp_case(const SuiteOptions& o, std::size_t idx) {
  const auto x = closed_instance(o, idx, std::min(o.max_size, 5));
  BfSolver solver;
  CaseResult r;
  const std::string at = where(x.A, x.a, x.B, x.b, x.n);
  if (solver.game_leq(x.A, x.a, x.B, x.b, x.n)) {
    const auto rep = karp_sample(x.A, x.a, x.B, x.b, x.n, kKarpSamples, case_seed(o.seed ^ 0x6b617270, idx));
    r.expect(rep.true_at_a > 0, "no sampled formula held at " + at);
    r.expect(rep.distinguished == 0,
             "sampled formula separates a related pair at " + at +
                 (rep.first_distinguishing ? ": " + to_string(*rep.first_distinguishing) : std::string()));
    r.expect(!karp_witness(x.A, x.a, x.B, x.b, x.n).has_value(), "witness for a related pair at " + at);
  } else {
    const auto w = karp_witness(x.A, x.a, x.B, x.b, x.n);
    r.expect(w.has_value(), "no witness at " + at);
    if (w) {
      r.expect(holds_at(x.A, *w, x.a), "witness false at a, " + at);
      r.expect(!holds_at(x.B, *w, x.b), "witness true at b, " + at);
      r.expect(classify(*w).a <= x.n, "witness above A-level n, " + at);
    }
  }
  return r;
}

// --- relativize / theta ----------------------------------------------------

constexpr std::size_t kRelativizeCases = 200;

CaseResult relativize_case(const SuiteOptions& o, std::size_t idx) {
  CaseResult r;
  const auto& corpus = sentence_corpus();
  if (idx == kRelativizeCases) {
    // Level preservation on the corpus.
    const auto tv = numbered_vars("a", 3);
    for (const auto& entry : corpus) {
      const auto f = parse_formula(entry.text);
      const auto before = classify(f);
      for (int i = 0; i < 3; ++i) {
        const auto after = classify(relativize(f, i, tv, 3));
        r.expect(after.e == before.e && after.a == before.a, std::string("levels changed for ") + entry.text);
      }
    }
    return r;
  }
  std::mt19937_64 rng(case_seed(o.seed, idx));
  const auto T = random_tree(rng, 1, std::max(o.max_size, 8));
  const auto a = random_closed(T, rng, 3);
  const auto tv = numbered_vars("a", a.size());
  const auto i = static_cast<int>(rng() % a.size());
  FormulaPtr f;
  if (idx % 2 == 0) {
    f = parse_formula(corpus[(idx / 2) % corpus.size()].text);
  } else {
    FormulaSampler s(rng(), "q");
    f = s.any(3, {});
  }
  const auto rel = relativize(f, i, tv, static_cast<int>(T.size()));
  Evaluator ev(T);
  const bool lhs = ev.eval(rel, tv, a);
  const bool rhs = eval(descendant_tree(T, a, static_cast<std::size_t>(i)).piece, f);
  r.expect(lhs == rhs, "relativized value differs on " + serialize(T) + tup(a) + " i=" + std::to_string(i) +
                           " f=" + to_string(f));
  return r;
}

CaseResult theta_case(const SuiteOptions& o, std::size_t idx) {
  std::mt19937_64 rng(case_seed(o.seed, idx));
  FormulaSampler s(rng(), "t");
  const int level = 1 + static_cast<int>(idx % 2);
  FiniteTree T;
  MarkedTuple a;
  FormulaPtr f;
  do {
    T = random_tree(rng, 2, o.max_size);
    a = random_closed(T, rng, 2);
    f = s.e_formula(level, position_vars(a.size()));
  } while (!holds_at(T, f, a));
  const auto vars = position_vars(a.size());
  const auto res = theta_sentences(T, a, f, vars);
  const auto views = decompose(T, a);
  CaseResult r;
  const std::string at = serialize(T) + tup(a) + " f=" + to_string(f);
  r.expect(res.theta.size() == a.size(), "wrong number of sentences at " + at);
  if (res.theta.size() != a.size())
    return r;
  for (std::size_t i = 0; i < a.size(); ++i)
    r.expect(eval(views[i].piece, res.theta[i]), "theta " + std::to_string(i) + " false on its piece at " + at);
  // Graft fresh pieces that satisfy the sentences; keep T's own piece when
  // no random candidate does.
  for (int round = 0; round < 4; ++round) {
    std::vector<FiniteTree> pieces;
    for (std::size_t i = 0; i < a.size(); ++i) {
      FiniteTree chosen = views[i].piece;
      for (int attempt = 0; attempt < 8; ++attempt) {
        auto p = random_tree(rng, 1, o.max_size);
        if (eval(p, res.theta[i])) {
          chosen = std::move(p);
          break;
        }
      }
      pieces.push_back(std::move(chosen));
    }
    MarkedTuple glued;
    const auto S = reassemble(T, a, pieces, &glued);
    r.expect(holds_at(S, f, glued), "grafted tree " + serialize(S) + tup(glued) + " fails f, from " + at);
  }
  return r;
}

// --- classify / phi / rank -------------------------------------------------

CaseResult classify_case(const SuiteOptions&, std::size_t) {
  CaseResult r;
  const auto t = classify(parse_formula(kAllOrAndEx));
  r.expect(t.a == 2, "A-level " + std::to_string(t.a) + ", expected 2");
  r.expect(t.pi == 4, "Pi-level " + std::to_string(t.pi) + ", expected 4");
  return r;
}

constexpr std::size_t kPhiRoundTrips = 500;

std::vector<ColoredFiniteTree> colored_up_to(std::size_t max_n, std::uint64_t colors) {
  std::vector<ColoredFiniteTree> out;
  for (std::size_t n = 1; n <= max_n; ++n)
    for (const auto& t : all_trees(n)) {
      std::vector<std::uint64_t> c(n, 0);
      while (true) {
        out.emplace_back(t, c);
        std::size_t i = 0;
        while (i < n && ++c[i] == colors)
          c[i++] = 0;
        if (i == n)
          break;
      }
    }
  return out;
}

CaseResult phi_case(const SuiteOptions& o, std::size_t idx) {
  CaseResult r;
  if (idx < kPhiRoundTrips) {
    std::mt19937_64 rng(case_seed(o.seed, idx));
    const auto t = gen_random_colored(1 + rng() % 9, rng(), 5);
    try {
      r.expect(canonical_code(decode(encode_colored(t))) == canonical_code(t), "round trip failed on " + serialize(t));
    } catch (const DecodeError& e) {
      r.expect(false, std::string(e.what()) + " on " + serialize(t));
    }
  } else if (idx == kPhiRoundTrips) {
    const auto pool = colored_up_to(4, 3);
    std::vector<CanonicalCode> src, img;
    for (const auto& t : pool) {
      src.push_back(canonical_code(t));
      img.push_back(canonical_code(encode_colored(t)));
    }
    for (std::size_t i = 0; i < pool.size(); ++i)
      for (std::size_t j = i + 1; j < pool.size(); ++j)
        r.expect((src[i] == src[j]) == (img[i] == img[j]),
                 "isomorphism not preserved for " + serialize(pool[i]) + " and " + serialize(pool[j]));
  } else {
    const auto e = serialize(encode_colored(parse_colored_tree("{0}")));
    r.expect(e == "((()(()))(()()))", "single node encodes to " + e);
  }
  return r;
}

CaseResult rank_case(const SuiteOptions& o, std::size_t idx) {
  CaseResult r;
  if (idx == 0) {
    const std::pair<const char*, int> fixtures[] = {{"()", 0}, {"(())", 1}, {"(()())", 1}};
    for (const auto& [text, want] : fixtures) {
      const int got = scott_rank(parse_tree(text), 4).rank;
      r.expect(got == want, std::string("rank of ") + text + " is " + std::to_string(got));
    }
    return r;
  }
  const auto trees = trees_up_to(o.max_size);
  const auto& t = trees[idx - 1];
  const int cap = static_cast<int>(t.size()) + 1;
  const auto base = scott_rank(t, cap);
  r.expect(!base.reached_cap, "rank of " + serialize(t) + " reached the cap");
  for (std::uint64_t k = 0; k < 3; ++k) {
    const auto u = shuffle_labels(t, case_seed(o.seed, idx * 3 + k));
    r.expect(scott_rank(u, cap).rank == base.rank, "rank not invariant on " + serialize(t));
  }
  return r;
}

std::vector<SuiteDef> build_suites() {
  auto fixed = [](std::size_t n) { return [n](const SuiteOptions&) { return n; }; };
  return {
      {"lemma31", "game and decomposition agree on all small pairs",
       [](const SuiteOptions& o) {
         const auto k = trees_up_to(o.max_size).size();
         return k * k;
       },
       lemma31_case},
      {"ancestor", "ancestor closure leaves verdicts unchanged", fixed(500), ancestor_case},
      {"nested", "the relations shrink as the level grows", fixed(500), nested_case},
      {"charform", "characteristic formulas match the game", fixed(200), charform_case},
      {"karp", "sampled formulas respect related pairs, witnesses separate the rest", fixed(100), karp_case},
      {"relativize", "relativized formulas evaluate like the piece", fixed(kRelativizeCases + 1), relativize_case},
      {"theta", "theta sentences hold on the pieces and transfer the formula", fixed(100), theta_case},
      {"classify", "hierarchy levels of the universal-or-and-exists formula", fixed(1), classify_case},
      {"phi", "colored-tree encoding round trips and respects isomorphism", fixed(kPhiRoundTrips + 2), phi_case},
      {"rank", "Scott rank fixtures and isomorphism invariance",
       [](const SuiteOptions& o) { return trees_up_to(o.max_size).size() + 1; }, rank_case},
  };
}

} // namespace

std::uint64_t case_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const std::vector<SuiteDef>& suites() {
  static const std::vector<SuiteDef> all = build_suites();
  return all;
}

const SuiteDef* find_suite(const std::string& name) {
  for (const auto& s : suites())
    if (s.name == name)
      return &s;
  return nullptr;
}

SuiteReport run_suite(const SuiteDef& suite, const SuiteOptions& opts) {
  const std::size_t n = suite.case_count(opts);
  std::vector<CaseResult> results(n);
  auto one = [&](std::size_t i) {
    try {
      results[i] = suite.run_case(opts, i);
    } catch (const std::exception& e) {
      results[i] = CaseResult{};
      results[i].expect(false, std::string("exception: ") + e.what());
    }
  };
  if (opts.parallel) {
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i)
      one(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i)
      one(i);
  }
  SuiteReport rep;
  rep.name = suite.name;
  rep.cases = n;
  for (std::size_t i = 0; i < n; ++i) {
    rep.checks += results[i].checks;
    rep.failed += static_cast<long long>(results[i].failures.size());
    for (const auto& f : results[i].failures)
      if (rep.failures.size() < kReportedFailures)
        rep.failures.push_back("case " + std::to_string(i) + ": " + f);
  }
  return rep;
}

std::string format_report(const SuiteReport& r, const SuiteOptions& opts) {
  std::ostringstream os;
  os << "suite=" << r.name << '\n'
     << "seed=" << opts.seed << '\n'
     << "max_size=" << opts.max_size << '\n'
     << "max_level=" << opts.max_level << '\n'
     << "cases=" << r.cases << '\n'
     << "checks=" << r.checks << '\n'
     << "passed=" << (r.checks - r.failed) << '\n'
     << "failed=" << r.failed << '\n';
  for (std::size_t k = 0; k < r.failures.size(); ++k)
    os << "failure." << k << '=' << r.failures[k] << '\n';
  os << "status=" << (r.passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

} // namespace treebf
