// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "treebf/cli.hpp"
#include "treebf/suites.hpp"

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "treebf");
  std::istringstream in;
  std::ostringstream out, err;
  const int code = treebf::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string field(const std::string& report, const std::string& key) {
  std::istringstream is(report);
  for (std::string line; std::getline(is, line);)
    if (line.rfind(key + "=", 0) == 0)
      return line.substr(key.size() + 1);
  return "?";
}

const char* const kCheckArgs[] = {"--max-size", "6", "--max-level", "3", "--seed", "1"};

Run check(const std::string& suite, bool serial, int threads = 0) {
  std::vector<std::string> args{"check", "--suite", suite};
  args.insert(args.end(), std::begin(kCheckArgs), std::end(kCheckArgs));
  if (serial)
    args.push_back("--serial");
  if (threads > 0) {
    args.push_back("--threads");
    args.push_back(std::to_string(threads));
  }
  return cli(args);
}

} // namespace

int main() {
  const std::pair<int, const char*> criteria[] = {
      {1, "lemma31"}, {2, "ancestor"},   {3, "nested"}, {4, "charform"}, {5, "karp"},
      {6, "relativize"}, {7, "theta"}, {8, "classify"}, {9, "phi"},      {10, "rank"},
  };
  bool all = true;
  std::vector<std::pair<std::string, std::string>> first_reports;
  for (const auto& [id, suite] : criteria) {
    const auto r = check(suite, false);
    bool ok = r.code == 0 && field(r.out, "status") == "PASS";
    std::string extra;
    if (id == 8) {
      // The command-line report of the same formula.
      const auto c = cli({"classify", "--formula",
                          "(all (x) (or (and (ex (y) (parent x y)) (ex (y) (not (= x y)))) (and (ex (z) (parent z x)))))"});
      ok = ok && c.code == 0 && field(c.out, "a") == "2" && field(c.out, "pi") == "4";
      extra = " a=" + field(c.out, "a") + " pi=" + field(c.out, "pi");
    }
    all = all && ok;
    first_reports.emplace_back(suite, r.out);
    std::cout << "criterion " << id << " (" << suite << "): " << (ok ? "PASS" : "FAIL")
              << " checks=" << field(r.out, "checks") << " failed=" << field(r.out, "failed") << extra << '\n';
    if (!ok)
      std::cout << r.out << r.err;
  }

  // Determinism: a second parallel run on four threads and a serial run of
  // every suite must reproduce the first report byte for byte.
  bool same = true;
  std::string diverged;
  for (const auto& [suite, report] : first_reports) {
    const bool rerun = check(suite, false, 4).out == report;
    const bool serial = check(suite, true).out == report;
    if (!rerun || !serial) {
      same = false;
      diverged += " " + suite + (rerun ? "(serial)" : "(rerun)");
    }
  }
  all = all && same;
  std::cout << "criterion 11 (determinism): " << (same ? "PASS" : "FAIL") << " suites=" << first_reports.size()
            << (same ? "" : " diverged:" + diverged) << '\n';
  return all ? 0 : 1;
}
