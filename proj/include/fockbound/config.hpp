#pragma once

// Run configuration for the command-line driver and the verification suites,
// plus the JSON forms of elements and truncated operators.

#include "fockbound/algebra.hpp"
#include "fockbound/boundary.hpp"
#include "fockbound/operator.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fockbound {

struct Tolerances {
  double eigen_tol = 1e-10;      // eigenspace membership
  double conv_tol = 1e-10;       // consecutive SOT iterates
  double svd_tol = 1e-8;         // relative nullspace threshold
  double relation_tol = 1e-12;   // exact operator identities
  double agreement_tol = 1e-9;   // two computations of the same product
  double gap_tol = 1e-6;         // commutant singular-value gap
};

/// Sizes of the verification suites. Defaults are the acceptance settings.
struct SuiteSettings {
  std::vector<int> relation_alphabets{2, 3};
  int shallow_depth = 6;       // relations, intertwining, depth escalation
  int product_order = 8;       // eigenvalue grid of the product suites
  int max_product_steps = 3;
  int factor_samples = 20;
  int random_elements = 50;
  int unitaries = 10;
};

struct ProbeSettings {
  ProbeMode mode = ProbeMode::Generators;
  std::vector<std::string> basis;  // empty: the default span basis
};

struct RunConfig {
  int n = 2;
  int depth = 8;
  std::string weights_spec = "uniform";  // echo of the input form
  Weights weights = Weights::uniform(2);
  int lambda_order = 4;
  int word_bound = 2;
  int fourier_terms = 4;
  Tolerances tol;
  int max_iter = 32;
  std::uint64_t seed = 1;
  std::optional<std::string> x;
  std::optional<std::string> y;
  ProbeSettings probe;
  SuiteSettings suite;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> dump;

  TruncationParams params() const { return {n, depth}; }
};

/// Strict parse: unknown keys, wrong types and violated invariants raise
/// ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
/// Re-checks the invariants after programmatic edits.
void validate(const RunConfig& c);

/// Fully resolved configuration, every default spelled out.
nlohmann::json to_json(const RunConfig& c);

nlohmann::json word_json(const Word& w);
/// Terms sorted by monomial shape: {coeff_re, coeff_im, lc, rc, eps, ra, la},
/// with phase [num, den] when non-trivial and coeff_exact in exact mode.
template <class S>
nlohmann::json element_json(const Element<S>& x);
/// Nonzero trusted entries plus the trust metadata.
nlohmann::json operator_json(const TruncatedOperator& x);
nlohmann::json complex_json(Complex z);

}  // namespace fockbound
