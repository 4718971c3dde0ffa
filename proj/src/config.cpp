#include "fockbound/config.hpp"

#include "fockbound/xspec.hpp"

#include <fstream>
#include <set>

namespace fockbound {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxDimension = std::size_t{1} << 22;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) bad(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) bad("unknown key '" + k + "' in " + where);
  }
}

int get_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) bad(std::string(key) + " must be an integer");
  const auto x = v.get<long long>();
  if (x < -1'000'000 || x > 1'000'000) bad(std::string(key) + " out of range");
  return static_cast<int>(x);
}

double get_double(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) bad(std::string(key) + " must be a number");
  return v.get<double>();
}

std::optional<std::string> get_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) bad(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

Weights parse_weights(const json& v, int n, std::string& echo) {
  if (v.is_string()) {
    if (v.get<std::string>() != "uniform") bad("weights must be \"uniform\" or a list");
    echo = "uniform";
    return Weights::uniform(n);
  }
  if (!v.is_array()) bad("weights must be \"uniform\" or a list");
  if (static_cast<int>(v.size()) != n) bad("weights must have n entries");
  const bool exact = std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
  try {
    if (exact) {
      std::vector<Rational> q;
      for (const auto& e : v) q.emplace_back(e.get<std::string>());
      echo = v.dump();
      return Weights(std::move(q));
    }
    std::vector<double> d;
    for (const auto& e : v) {
      if (!e.is_number()) bad("weights must be all numbers or all rational strings");
      d.push_back(e.get<double>());
    }
    echo = v.dump();
    return Weights(std::move(d));
  } catch (const ValidationError& e) {
    bad(e.what());
  } catch (const std::runtime_error& e) {
    bad(std::string("bad rational weight: ") + e.what());
  }
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.n < 1) bad("n must be >= 1");
  if (c.depth < 1) bad("depth must be >= 1");
  if (c.word_bound < 0) bad("word_bound must be >= 0");
  if (c.depth < c.word_bound + 2) bad("depth must be >= word_bound + 2");
  if (c.weights.size() != c.n) bad("weights must have n entries");
  try {
    if (basis_dimension(c.n, c.depth) > kMaxDimension) bad("truncated space too large");
  } catch (const CapacityError&) {
    bad("truncated space too large");
  }
  if (c.lambda_order < 1) bad("lambda_order must be >= 1");
  if (c.fourier_terms < 1 || c.fourier_terms % c.lambda_order != 0) {
    bad("fourier_terms must be a positive multiple of lambda_order");
  }
  if (c.fourier_terms > c.depth) bad("fourier_terms exceeds the trust depth");
  if (c.max_iter < 1) bad("max_iter must be >= 1");
  for (double t : {c.tol.eigen_tol, c.tol.conv_tol, c.tol.svd_tol, c.tol.relation_tol,
                   c.tol.agreement_tol, c.tol.gap_tol}) {
    if (!(t > 0.0) || !std::isfinite(t)) bad("tolerances must be positive");
  }
  const auto& s = c.suite;
  if (s.relation_alphabets.empty()) bad("relation_alphabets must be non-empty");
  for (int a : s.relation_alphabets) {
    if (a < 1 || a > 9) bad("relation_alphabets entries must lie in 1..9");
  }
  if (s.shallow_depth < 2 || s.shallow_depth > c.depth) bad("shallow_depth must lie in 2..depth");
  if (s.product_order < 1) bad("product_order must be >= 1");
  if (s.max_product_steps < 0) bad("max_product_steps must be >= 0");
  if (s.factor_samples < 0 || s.random_elements < 0 || s.unitaries < 0) bad("sample counts must be >= 0");
  for (const auto& b : c.probe.basis) {
    try {
      basis_member(parse_xspec(b, c.n));
    } catch (const Error& e) {
      bad(std::string("probe basis: ") + e.what());
    }
  }
  for (const auto* spec : {&c.x, &c.y}) {
    if (!*spec) continue;
    try {
      parse_xspec(**spec, c.n);
    } catch (const Error& e) {
      bad(e.what());
    }
  }
}

RunConfig parse_config(const json& j) {
  check_keys(j, "config", {"n", "depth", "weights", "lambda_order", "word_bound", "fourier_terms",
                           "tolerances", "max_iter", "seed", "x", "y", "probe", "suite", "outputs"});
  RunConfig c;
  c.n = get_int(j, "n", c.n);
  if (c.n < 1) bad("n must be >= 1");
  c.depth = get_int(j, "depth", c.depth);
  c.weights = parse_weights(j.value("weights", json("uniform")), c.n, c.weights_spec);
  c.lambda_order = get_int(j, "lambda_order", c.lambda_order);
  c.word_bound = get_int(j, "word_bound", c.word_bound);
  c.fourier_terms = get_int(j, "fourier_terms", c.lambda_order);
  c.max_iter = get_int(j, "max_iter", c.max_iter);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) bad("seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.x = get_string(j, "x");
  c.y = get_string(j, "y");
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    check_keys(t, "tolerances",
               {"eigen_tol", "conv_tol", "svd_tol", "relation_tol", "agreement_tol", "gap_tol"});
    c.tol.eigen_tol = get_double(t, "eigen_tol", c.tol.eigen_tol);
    c.tol.conv_tol = get_double(t, "conv_tol", c.tol.conv_tol);
    c.tol.svd_tol = get_double(t, "svd_tol", c.tol.svd_tol);
    c.tol.relation_tol = get_double(t, "relation_tol", c.tol.relation_tol);
    c.tol.agreement_tol = get_double(t, "agreement_tol", c.tol.agreement_tol);
    c.tol.gap_tol = get_double(t, "gap_tol", c.tol.gap_tol);
  }
  if (j.contains("probe")) {
    const auto& p = j.at("probe");
    check_keys(p, "probe", {"mode", "basis"});
    if (const auto mode = get_string(p, "mode")) {
      try {
        c.probe.mode = parse_probe_mode(*mode);
      } catch (const Error& e) {
        bad(e.what());
      }
    }
    if (p.contains("basis")) {
      const auto& b = p.at("basis");
      if (b.is_string() && b.get<std::string>() == "default") {
        c.probe.basis.clear();
      } else if (b.is_array() && !b.empty()) {
        for (const auto& e : b) {
          if (!e.is_string()) bad("probe basis entries must be strings");
          c.probe.basis.push_back(e.get<std::string>());
        }
      } else {
        bad("probe basis must be \"default\" or a non-empty list");
      }
    }
  }
  if (j.contains("suite")) {
    const auto& s = j.at("suite");
    check_keys(s, "suite", {"relation_alphabets", "shallow_depth", "product_order", "max_product_steps",
                            "factor_samples", "random_elements", "unitaries"});
    if (s.contains("relation_alphabets")) {
      const auto& a = s.at("relation_alphabets");
      if (!a.is_array()) bad("relation_alphabets must be a list");
      c.suite.relation_alphabets.clear();
      for (const auto& e : a) {
        if (!e.is_number_integer()) bad("relation_alphabets entries must be integers");
        c.suite.relation_alphabets.push_back(e.get<int>());
      }
    }
    c.suite.shallow_depth = get_int(s, "shallow_depth", std::min(c.suite.shallow_depth, c.depth));
    c.suite.product_order = get_int(s, "product_order", c.suite.product_order);
    c.suite.max_product_steps = get_int(s, "max_product_steps", c.suite.max_product_steps);
    c.suite.factor_samples = get_int(s, "factor_samples", c.suite.factor_samples);
    c.suite.random_elements = get_int(s, "random_elements", c.suite.random_elements);
    c.suite.unitaries = get_int(s, "unitaries", c.suite.unitaries);
  } else {
    c.suite.shallow_depth = std::min(c.suite.shallow_depth, c.depth);
  }
  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    check_keys(o, "outputs", {"report", "dump"});
    if (const auto r = get_string(o, "report")) c.out = *r;
    if (const auto d = get_string(o, "dump")) c.dump = *d;
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json weights;
  if (c.weights_spec == "uniform") {
    weights = "uniform";
  } else {
    weights = json::parse(c.weights_spec);
  }
  json j = {
      {"n", c.n},
      {"depth", c.depth},
      {"weights", weights},
      {"weights_resolved", c.weights.values()},
      {"lambda_order", c.lambda_order},
      {"word_bound", c.word_bound},
      {"fourier_terms", c.fourier_terms},
      {"tolerances",
       {{"eigen_tol", c.tol.eigen_tol},
        {"conv_tol", c.tol.conv_tol},
        {"svd_tol", c.tol.svd_tol},
        {"relation_tol", c.tol.relation_tol},
        {"agreement_tol", c.tol.agreement_tol},
        {"gap_tol", c.tol.gap_tol}}},
      {"max_iter", c.max_iter},
      {"seed", c.seed},
      {"x", c.x ? json(*c.x) : json(nullptr)},
      {"y", c.y ? json(*c.y) : json(nullptr)},
      {"probe",
       {{"mode", to_string(c.probe.mode)},
        {"basis", c.probe.basis.empty() ? json("default") : json(c.probe.basis)}}},
      {"suite",
       {{"relation_alphabets", c.suite.relation_alphabets},
        {"shallow_depth", c.suite.shallow_depth},
        {"product_order", c.suite.product_order},
        {"max_product_steps", c.suite.max_product_steps},
        {"factor_samples", c.suite.factor_samples},
        {"random_elements", c.suite.random_elements},
        {"unitaries", c.suite.unitaries}}},
      {"outputs",
       {{"report", c.out ? json(c.out->string()) : json(nullptr)},
        {"dump", c.dump ? json(c.dump->string()) : json(nullptr)}}},
  };
  return j;
}

json word_json(const Word& w) {
  json a = json::array();
  for (Letter l : w) a.push_back(static_cast<int>(l));
  return a;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

template <class S>
json element_json(const Element<S>& x) {
  json terms = json::array();
  for (const auto& [shape, c] : x.terms()) {
    const Complex z = ScalarTraits<S>::to_complex(c);
    json t = {{"coeff_re", z.real()},
              {"coeff_im", z.imag()},
              {"lc", word_json(shape.lc)},
              {"rc", word_json(shape.rc)},
              {"eps", shape.eps ? 1 : 0},
              {"ra", word_json(shape.ra)},
              {"la", word_json(shape.la)}};
    if (!shape.phase.is_one()) t["phase"] = json::array({shape.phase.num(), shape.phase.den()});
    if constexpr (std::is_same_v<S, GaussianRational>) t["coeff_exact"] = c.to_string();
    terms.push_back(std::move(t));
  }
  return terms;
}

template json element_json<Complex>(const Element<Complex>&);
template json element_json<GaussianRational>(const Element<GaussianRational>&);

json operator_json(const TruncatedOperator& x) {
  json entries = json::array();
  const auto block = static_cast<int>(x.trust_block());
  const auto& words = x.tables().words;
  // Column-major storage gives a deterministic order.
  for (int c = 0; c < block; ++c) {
    for (SparseMatrix::InnerIterator it(x.matrix(), c); it; ++it) {
      if (it.row() >= block || it.value() == Complex{0.0, 0.0}) continue;
      entries.push_back({{"row", word_json(words[static_cast<std::size_t>(it.row())])},
                         {"col", word_json(words[static_cast<std::size_t>(c)])},
                         {"re", it.value().real()},
                         {"im", it.value().imag()}});
    }
  }
  return {{"n", x.params().n},   {"depth", x.params().depth}, {"trust", x.trust()},
          {"raise", x.raise()},  {"lower", x.lower()},        {"entries", std::move(entries)}};
}

}  // namespace fockbound
