#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace treebf {

struct SuiteOptions {
  int max_size = 6;
  int max_level = 3;
  std::uint64_t seed = 1;
  bool parallel = true;
};

/// Outcome of one independent case of a suite.
struct CaseResult {
  long long checks = 0;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok)
      failures.push_back(what);
  }
};

struct SuiteDef {
  std::string name;
  std::string summary;
  std::function<std::size_t(const SuiteOptions&)> case_count;
  std::function<CaseResult(const SuiteOptions&, std::size_t)> run_case;
};

struct SuiteReport {
  std::string name;
  std::size_t cases = 0;
  long long checks = 0;
  long long failed = 0;
  std::vector<std::string> failures; // first few, in case order

  bool passed() const noexcept { return failed == 0 && checks > 0; }
};

/// All suites in a fixed order.
const std::vector<SuiteDef>& suites();
const SuiteDef* find_suite(const std::string& name);

/// Runs every case; with opts.parallel the cases are spread over OpenMP
/// threads. The report does not depend on the schedule.
SuiteReport run_suite(const SuiteDef& suite, const SuiteOptions& opts);

/// key=value lines.
std::string format_report(const SuiteReport& r, const SuiteOptions& opts);

/// Seed of case `index`, mixed from the suite seed.
std::uint64_t case_seed(std::uint64_t seed, std::size_t index);

} // namespace treebf
