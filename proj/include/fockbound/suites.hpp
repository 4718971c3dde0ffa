#pragma once

// Verification suites shared by `fockbound verify` and the acceptance binary.
// Each suite returns named checks, each a measured value against a bound.

#include "fockbound/config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fockbound {

struct Check {
  enum class Bound { Below, AtMost, AtLeast, Equal };
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  Bound bound = Bound::Below;
  bool passed = false;
  std::string detail;

  static Check below(std::string name, double value, double threshold, std::string detail = {});
  static Check at_most(std::string name, double value, double threshold, std::string detail = {});
  static Check at_least(std::string name, double value, double threshold, std::string detail = {});
  static Check equal(std::string name, double value, double expected, std::string detail = {});
};

struct SuiteResult {
  std::string id;
  std::string title;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  double seconds = 0.0;  // wall time; kept out of JSON reports

  bool passed() const;
  void add(Check c) { checks.push_back(std::move(c)); }
};

SuiteResult suite_relations(const RunConfig& c);
SuiteResult suite_eigen(const RunConfig& c);
SuiteResult suite_products(const RunConfig& c);
SuiteResult suite_phi(const RunConfig& c);
SuiteResult suite_commutant(const RunConfig& c);
SuiteResult suite_factorization(const RunConfig& c);
SuiteResult suite_expectation(const RunConfig& c);
SuiteResult suite_intertwining(const RunConfig& c);
SuiteResult suite_depth_escalation(const RunConfig& c);

struct SuiteEntry {
  std::string id;
  std::function<SuiteResult(const RunConfig&)> run;
};

/// All suites in report order.
const std::vector<SuiteEntry>& all_suites();

/// Runs fn, stores the elapsed time and converts library errors into a
/// failed check.
SuiteResult run_suite(const SuiteEntry& entry, const RunConfig& c);

nlohmann::json to_json(const SuiteResult& r);

}  // namespace fockbound
