#include "treebf/cli.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace treebf;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "treebf");
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run(args, in, out, err);
  return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("compare reports the verdict and exit status") {
  const auto yes = cli({"compare", "--left", "(())", "--right", "()", "--tuple-left", "0", "--tuple-right", "0",
                        "--level", "1", "--method", "both"});
  CHECK(yes.code == 0);
  CHECK(yes.out == "method=both\nholds=true\nlevel=1\n");
  const auto no = cli({"compare", "--left", "()", "--right", "(())", "--level", "1"});
  CHECK(no.code == 1);
  CHECK(no.out.find("trace.0=level:1 spoiler:R extension:1 response:none") != std::string::npos);
}

TEST_CASE("classify reports the hierarchy levels") {
  const auto r = cli({"classify", "--formula",
                      "(all (x) (or (and (ex (y) (parent x y)) (ex (y) (not (= x y)))) (and (ex (z) (parent z x)))))"});
  CHECK(r.code == 0);
  CHECK(r.out == "sigma=5\npi=4\ne=3\na=2\nebar=3\nabar=2\n");
  const auto t = cli({"classify", "--output", "text", "--formula", "(all (x) (root x))"});
  CHECK(t.out == "sigma=2 pi=1\ne=2 a=1 ebar=2 abar=1\n");
}

TEST_CASE("exit codes") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"bogus"}).code == kExitUsage);
  CHECK(cli({"compare", "--left", "()"}).code == kExitUsage);
  CHECK(cli({"compare", "--left", "()", "--right", "()", "--level", "-1"}).code == kExitUsage);
  CHECK(cli({"check", "--suite", "nope"}).code == kExitUsage);
  CHECK(cli({"compare", "--left", "(()", "--right", "()", "--level", "1"}).code == kExitInput);
  CHECK(cli({"compare", "--left", "()", "--right", "()", "--tuple-left", "4", "--level", "1"}).code == kExitInput);
  CHECK(cli({"classify", "--formula", "(not (and))"}).code == kExitInput);
  CHECK(cli({"decompose", "--tree", "(()())", "--tuple", "1"}).code == kExitInput);
  CHECK(cli({"rank", "--tree", "@/nonexistent/tree.txt"}).code == kExitInput);
  CHECK(cli({"decode"}, "()").code == kExitInput);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("encode and decode through standard input") {
  const auto e = cli({"encode"}, "{0}");
  CHECK(e.code == 0);
  CHECK(e.out == "((()(()))(()()))\n");
  const auto d = cli({"decode"}, "((()(()))((()())))");
  CHECK(d.out == "{1}\n");
}

TEST_CASE("trees and formulas can come from files") {
  const std::string path = "cli_test_tree.txt";
  {
    std::ofstream f(path);
    f << "((())())\n";
  }
  const auto r = cli({"rank", "--tree", "@" + path, "--cap", "4"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("rank=1\n", 0) == 0);
  const auto e = cli({"encode", "--input", path});
  CHECK(e.code == kExitInput); // plain brackets are not the colored grammar
  std::remove(path.c_str());
}

TEST_CASE("other commands") {
  CHECK(cli({"orbits", "--tree", "(()())", "--k", "1"}).out == "orbits=2\norbit.0=0\norbit.1=1;2\n");
  CHECK(cli({"decompose", "--tree", "(()(()))", "--tuple", "0,2"}).out ==
        "pieces=2\npiece.0=(())\npiece.0.anchor=0\npiece.0.nodes=0,1\n"
        "piece.1=(())\npiece.1.anchor=2\npiece.1.nodes=2,3\n");
  CHECK(cli({"level", "--left", "(((())))", "--right", "((()))", "--method", "game"}).out ==
        "level=1\nreached_cap=false\n");
  CHECK(cli({"gen", "--size", "6", "--seed", "3"}).out == cli({"gen", "--size", "6", "--seed", "3"}).out);
  const auto c = cli({"charform", "--tree", "(())", "--level", "1", "--against", "()"});
  CHECK(c.code == 0);
  CHECK(c.out.find("holds=true") != std::string::npos);
  const auto c2 = cli({"charform", "--tree", "()", "--level", "1", "--against", "(())"});
  CHECK(c2.code == 1);
  const auto th = cli({"theta", "--tree", "((())())", "--tuple", "0,1", "--formula",
                       "(ex (y) (fand (parent x1 y) (not (= y x0))))"});
  CHECK(th.code == 0);
  CHECK(th.out.find("theta.1=") != std::string::npos);
  const auto rel = cli({"relativize", "--formula", "(ex (x) (= x x))", "--vars", "a0,a1", "--index", "1"});
  CHECK(rel.out == "formula=(ex (x) (fand (eta 1 (x a0 a1) #4) (= x x)))\ne=1\na=2\n");
}

TEST_CASE("check runs a single suite deterministically") {
  const auto a = cli({"check", "--suite", "classify"});
  const auto b = cli({"check", "--suite", "classify", "--serial"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("status=PASS") != std::string::npos);
}
