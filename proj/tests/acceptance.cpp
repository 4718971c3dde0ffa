// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "fockbound/suites.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace fockbound;

namespace {

struct Criterion {
  int number;
  std::string suite;
  std::optional<double> time_limit;
};

std::string failures(const SuiteResult& r) {
  std::ostringstream out;
  for (const auto& c : r.checks) {
    if (!c.passed) out << " [" << c.name << " = " << c.value << " vs " << c.threshold << "]";
  }
  return out.str();
}

}  // namespace

int main() {
  const std::filesystem::path data = FOCKBOUND_TEST_DATA;
  RunConfig config;
  try {
    config = load_config(data / "acceptance.json");
  } catch (const std::exception& e) {
    std::cerr << "cannot load acceptance config: " << e.what() << "\n";
    return 2;
  }

  const Criterion criteria[] = {
      {1, "relations", 5.0},  {2, "eigen", {}},         {3, "products", 30.0},
      {4, "phi", {}},         {5, "commutant", 60.0},   {6, "factorization", {}},
      {7, "expectation", {}}, {8, "intertwining", {}},  {9, "depth_escalation", {}},
  };

  bool all = true;
  for (const auto& cr : criteria) {
    const SuiteEntry* entry = nullptr;
    for (const auto& e : all_suites()) {
      if (e.id == cr.suite) entry = &e;
    }
    if (entry == nullptr) {
      std::cout << "criterion " << cr.number << ": FAIL (suite " << cr.suite << " missing)\n";
      all = false;
      continue;
    }
    const SuiteResult r = run_suite(*entry, config);
    bool ok = r.passed();
    std::string why = failures(r);
    if (cr.time_limit && r.seconds >= *cr.time_limit) {
      ok = false;
      why += " [runtime " + std::to_string(r.seconds) + " s]";
    }
    std::cout << "criterion " << cr.number << ": " << (ok ? "PASS" : "FAIL") << " (" << r.title
              << ", " << r.checks.size() << " checks, " << r.seconds << " s)" << why << "\n"
              << std::flush;
    all = all && ok;
  }

  const auto out = std::filesystem::temp_directory_path() / "fockbound_acceptance_verify.json";
  const std::string cmd = std::string("\"") + FOCKBOUND_CLI_PATH + "\" verify --config \"" +
                          (data / "acceptance.json").string() + "\" --out \"" + out.string() +
                          "\" 2>/dev/null";
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  const bool ok10 = code == 0 && seconds < 120.0;
  std::cout << "criterion 10: " << (ok10 ? "PASS" : "FAIL") << " (verify exit " << code << ", "
            << seconds << " s)\n";
  std::filesystem::remove(out);
  all = all && ok10;
  return all ? 0 : 1;
}
