#include "treebf/cli.hpp"

#include "treebf/bf.hpp"
#include "treebf/charform.hpp"
#include "treebf/decomp.hpp"
#include "treebf/encode.hpp"
#include "treebf/formula.hpp"
#include "treebf/suites.hpp"

#include <CLI11.hpp>

#include <omp.h>

#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>

namespace treebf {

namespace {

// Bad file names, out-of-range tuples and similar input faults.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

constexpr int kExitDiscrepancy = 4;

class Report {
public:
  void add(std::string key, std::string value) { rows_.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, long long value) { add(std::move(key), std::to_string(value)); }
  void add_flag(std::string key, bool value) { add(std::move(key), std::string(value ? "true" : "false")); }

  // Splits existing key=value lines.
  void add_lines(const std::string& text) {
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) {
      const auto eq = line.find('=');
      if (eq != std::string::npos)
        add(line.substr(0, eq), line.substr(eq + 1));
    }
  }

  std::string render(bool text) const {
    std::size_t width = 0;
    for (const auto& [k, v] : rows_)
      width = std::max(width, k.size());
    std::string out;
    for (const auto& [k, v] : rows_) {
      if (text)
        out += k + std::string(width + 2 - k.size(), ' ') + v + '\n';
      else
        out += k + '=' + v + '\n';
    }
    return out;
  }

private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

// Inline text, or the contents of a file when the value starts with '@'.
std::string load_text(const std::string& value) {
  if (value.empty() || value[0] != '@')
    return value;
  std::ifstream f(value.substr(1));
  if (!f)
    throw InputError("cannot read " + value.substr(1));
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

FiniteTree load_tree(const std::string& value) { return parse_tree(load_text(value)); }
FormulaPtr load_formula(const std::string& value) { return parse_formula(load_text(value)); }

MarkedTuple load_tuple(const std::string& value, const FiniteTree& t, const char* what) {
  MarkedTuple tup;
  try {
    tup = parse_tuple(value);
  } catch (const std::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
  for (NodeId v : tup)
    if (!t.valid(v))
      throw InputError(std::string(what) + ": node " + std::to_string(v) + " is not in a tree of size " +
                       std::to_string(t.size()));
  return tup;
}

std::vector<VarId> load_vars(const std::string& value, std::size_t fallback_len) {
  if (value.empty())
    return position_vars(fallback_len);
  std::vector<std::string> names;
  std::istringstream is(value);
  for (std::string name; std::getline(is, name, ',');) {
    if (name.empty())
      throw InputError("empty variable name in " + value);
    names.push_back(name);
  }
  return intern_all(names);
}

std::string read_all(std::istream& in) { return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}; }

std::string join_tuples(const std::vector<MarkedTuple>& ts) {
  std::string s;
  for (std::size_t k = 0; k < ts.size(); ++k)
    s += (k ? ";" : "") + format_tuple(ts[k]);
  return s;
}

struct Options {
  std::string output = "kv";
  std::string left, right, tree, formula, tuple_left = "0", tuple_right = "0", tuple = "0", vars, input;
  std::string method = "both", suite = "all", against, against_tuple = "0";
  int level = 1, cap = 5, k = 1, index = 0, bound = 4, size = 1, max_size = 6, max_level = 3, threads = 0;
  int block = 0;
  std::uint64_t seed = 1, colors = 0;
  bool closed = false, serial = false;
};

} // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Back-and-forth relations, formulas and encodings for finite rooted trees", "treebf"};
  Options o;
  app.add_option("--output", o.output, "report style")->check(CLI::IsMember({"kv", "text"}));
  app.fallthrough();
  app.require_subcommand(1);
  const auto nonneg = CLI::NonNegativeNumber;

  auto* compare = app.add_subcommand("compare", "decide (L, a) <=_n (R, b)");
  auto* level = app.add_subcommand("level", "largest n with (L, a) <=_n (R, b), up to a cap");
  for (auto* c : {compare, level}) {
    c->add_option("--left", o.left, "left tree, or @file")->required();
    c->add_option("--right", o.right, "right tree, or @file")->required();
    c->add_option("--tuple-left", o.tuple_left, "comma-separated preorder ids");
    c->add_option("--tuple-right", o.tuple_right, "comma-separated preorder ids");
    c->add_option("--method", o.method)->check(CLI::IsMember({"game", "decomp", "both"}));
  }
  compare->add_option("--level", o.level)->required()->check(nonneg);
  level->add_option("--cap", o.cap)->check(nonneg);

  auto* rank = app.add_subcommand("rank", "Scott rank of a finite tree");
  rank->add_option("--tree", o.tree)->required();
  rank->add_option("--cap", o.cap)->check(CLI::PositiveNumber);

  auto* orbits = app.add_subcommand("orbits", "automorphism orbits of k-tuples");
  orbits->add_option("--tree", o.tree)->required();
  orbits->add_option("--k", o.k)->check(nonneg);
  orbits->add_flag("--closed", o.closed, "ancestor-closed tuples only");

  auto* decompose_cmd = app.add_subcommand("decompose", "descendant trees of a rooted closed tuple");
  decompose_cmd->add_option("--tree", o.tree)->required();
  decompose_cmd->add_option("--tuple", o.tuple);

  auto* relativize_cmd = app.add_subcommand("relativize", "restrict a sentence to one descendant tree");
  relativize_cmd->add_option("--formula", o.formula)->required();
  relativize_cmd->add_option("--index", o.index)->check(nonneg);
  relativize_cmd->add_option("--vars", o.vars, "tuple variable names, comma-separated")->required();
  relativize_cmd->add_option("--bound", o.bound)->check(CLI::PositiveNumber);

  auto* classify_cmd = app.add_subcommand("classify", "hierarchy levels of a formula");
  classify_cmd->add_option("--formula", o.formula)->required();

  auto* charform = app.add_subcommand("charform", "characteristic formula of (T, a) at level n");
  charform->add_option("--tree", o.tree)->required();
  charform->add_option("--tuple", o.tuple);
  charform->add_option("--level", o.level)->check(CLI::PositiveNumber);
  charform->add_option("--block", o.block, "cap on universal block length (default |T| + 1)")->check(nonneg);
  charform->add_option("--against", o.against, "tree to evaluate the formula on");
  charform->add_option("--against-tuple", o.against_tuple);

  auto* theta = app.add_subcommand("theta", "per-piece sentences transferring a formula");
  theta->add_option("--tree", o.tree)->required();
  theta->add_option("--tuple", o.tuple);
  theta->add_option("--formula", o.formula)->required();
  theta->add_option("--vars", o.vars, "variable of each tuple entry (default x0,x1,...)");

  auto* encode = app.add_subcommand("encode", "colored tree to plain tree");
  auto* decode_cmd = app.add_subcommand("decode", "plain tree back to a colored tree");
  for (auto* c : {encode, decode_cmd})
    c->add_option("--input", o.input, "file to read (default standard input)");

  auto* gen = app.add_subcommand("gen", "seeded random tree");
  gen->add_option("--size", o.size)->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed);
  gen->add_option("--colors", o.colors, "draw colors below this bound (0: plain tree)");

  auto* check = app.add_subcommand("check", "run property suites");
  check->add_option("--suite", o.suite, "suite name or all");
  check->add_option("--max-size", o.max_size)->check(CLI::PositiveNumber);
  check->add_option("--max-level", o.max_level)->check(CLI::PositiveNumber);
  check->add_option("--seed", o.seed);
  check->add_option("--threads", o.threads)->check(nonneg);
  check->add_flag("--serial", o.serial, "run cases one after another");

  const std::set<std::string> commands{"compare", "level",  "rank",   "orbits", "decompose", "relativize", "classify",
                                       "charform", "theta", "encode", "decode", "gen",       "check"};
  if (args.size() > 1 && args[1].rfind("-", 0) != 0 && !commands.count(args[1])) {
    err << "usage error: unknown command " << args[1] << '\n';
    return kExitUsage;
  }

  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  const bool text = o.output == "text";
  Report rep;
  int code = kExitOk;
  try {
    if (*compare || *level) {
      const auto L = load_tree(o.left);
      const auto R = load_tree(o.right);
      const auto a = load_tuple(o.tuple_left, L, "--tuple-left");
      const auto b = load_tuple(o.tuple_right, R, "--tuple-right");
      const auto m = parse_method(o.method);
      if (*compare) {
        const auto v = bf_leq(L, a, R, b, o.level, m);
        rep.add("method", std::string(method_name(m)));
        rep.add_lines(format_verdict(v));
        code = v.holds ? kExitOk : kExitFalse;
      } else {
        const auto lv = bf_level(L, a, R, b, o.cap, m);
        rep.add("level", lv.level);
        rep.add_flag("reached_cap", lv.reached_cap);
      }
    } else if (*rank) {
      const auto t = load_tree(o.tree);
      const auto r = scott_rank(t, o.cap);
      rep.add("rank", r.rank);
      rep.add_flag("reached_cap", r.reached_cap);
      if (r.witness_pair) {
        rep.add("witness.left", format_tuple(r.witness_pair->first));
        rep.add("witness.right", format_tuple(r.witness_pair->second));
      }
    } else if (*orbits) {
      const auto t = load_tree(o.tree);
      const auto blocks = orbit_partition(t, o.k, o.closed);
      rep.add("orbits", static_cast<long long>(blocks.size()));
      for (std::size_t i = 0; i < blocks.size(); ++i)
        rep.add("orbit." + std::to_string(i), join_tuples(blocks[i]));
    } else if (*decompose_cmd) {
      const auto t = load_tree(o.tree);
      const auto a = load_tuple(o.tuple, t, "--tuple");
      const auto views = decompose(t, a);
      rep.add("pieces", static_cast<long long>(views.size()));
      for (std::size_t i = 0; i < views.size(); ++i) {
        const std::string key = "piece." + std::to_string(i);
        MarkedTuple nodes = views[i].origin;
        std::sort(nodes.begin(), nodes.end());
        rep.add(key, serialize(views[i].piece));
        rep.add(key + ".anchor", views[i].anchor);
        rep.add(key + ".nodes", format_tuple(nodes));
      }
    } else if (*relativize_cmd) {
      const auto f = load_formula(o.formula);
      const auto tv = load_vars(o.vars, 0);
      const auto g = relativize(f, o.index, tv, o.bound);
      const auto tag = classify(g);
      rep.add("formula", to_string(g));
      rep.add("e", tag.e);
      rep.add("a", tag.a);
    } else if (*classify_cmd) {
      const auto tag = classify(load_formula(o.formula));
      if (text) {
        out << format_tag(tag);
        return kExitOk;
      }
      rep.add("sigma", tag.sigma);
      rep.add("pi", tag.pi);
      rep.add("e", tag.e);
      rep.add("a", tag.a);
      rep.add("ebar", tag.ebar);
      rep.add("abar", tag.abar);
    } else if (*charform) {
      const auto t = load_tree(o.tree);
      const auto a = load_tuple(o.tuple, t, "--tuple");
      const int K = o.block > 0 ? o.block : static_cast<int>(t.size()) + 1;
      const auto f = char_formula(t, a, o.level, K);
      const auto tag = classify(f);
      rep.add("formula", to_string(f));
      rep.add("nodes", static_cast<long long>(f->tree_size()));
      rep.add("e", tag.e);
      rep.add("a", tag.a);
      if (!o.against.empty()) {
        const auto B = load_tree(o.against);
        const auto b = load_tuple(o.against_tuple, B, "--against-tuple");
        if (b.size() != a.size())
          throw InputError("--against-tuple must have the length of --tuple");
        Evaluator ev(B);
        const bool holds = ev.eval(f, position_vars(b.size()), b);
        rep.add_flag("holds", holds);
        code = holds ? kExitOk : kExitFalse;
      }
    } else if (*theta) {
      const auto t = load_tree(o.tree);
      const auto a = load_tuple(o.tuple, t, "--tuple");
      const auto f = load_formula(o.formula);
      const auto vars = load_vars(o.vars, a.size());
      if (vars.size() != a.size())
        throw InputError("--vars must name one variable per tuple entry");
      const auto res = theta_sentences(t, a, f, vars);
      rep.add("beta", res.beta);
      rep.add("disjunct", static_cast<long long>(res.disjunct));
      rep.add("witness", format_tuple(res.witness));
      for (std::size_t i = 0; i < res.theta.size(); ++i) {
        rep.add("chunk." + std::to_string(i), format_tuple(res.chunks[i]));
        rep.add("theta." + std::to_string(i), to_string(res.theta[i]));
      }
    } else if (*encode || *decode_cmd) {
      const std::string src = o.input.empty() ? read_all(in) : load_text("@" + o.input);
      if (*encode)
        out << serialize(encode_colored(parse_colored_tree(src))) << '\n';
      else
        out << serialize(decode(parse_tree(src))) << '\n';
      return kExitOk;
    } else if (*gen) {
      if (o.colors > 0)
        out << serialize(gen_random_colored(static_cast<std::size_t>(o.size), o.seed, o.colors)) << '\n';
      else
        out << serialize(gen_random(static_cast<std::size_t>(o.size), o.seed)) << '\n';
      return kExitOk;
    } else if (*check) {
      SuiteOptions so;
      so.max_size = o.max_size;
      so.max_level = o.max_level;
      so.seed = o.seed;
      so.parallel = !o.serial;
      if (o.threads > 0)
        omp_set_num_threads(o.threads);
      std::vector<const SuiteDef*> chosen;
      if (o.suite == "all") {
        for (const auto& s : suites())
          chosen.push_back(&s);
      } else if (const auto* s = find_suite(o.suite)) {
        chosen.push_back(s);
      } else {
        err << "usage error: unknown suite " << o.suite << '\n';
        return kExitUsage;
      }
      bool all_ok = true;
      for (std::size_t k = 0; k < chosen.size(); ++k) {
        const auto r = run_suite(*chosen[k], so);
        all_ok = all_ok && r.passed();
        Report one;
        one.add_lines(format_report(r, so));
        out << (k ? "\n" : "") << one.render(text);
      }
      return all_ok ? kExitOk : kExitFalse;
    }
  } catch (const DiscrepancyError& e) {
    err << "discrepancy: " << e.what() << '\n';
    return kExitDiscrepancy;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DecodeError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    // FormulaError, PreconditionError, InputError and the like
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  out << rep.render(text);
  return code;
}

} // namespace treebf
