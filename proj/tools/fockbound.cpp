// fockbound <verify|product|commutant|expectation|spectrum> --config <path>
//           [--dump <dir>] [--seed <u64>] [--out <path>]
//
// Exit codes: 0 ok, 1 failed identity or computation, 2 config error.

#include "fockbound/config.hpp"
#include "fockbound/suites.hpp"
#include "fockbound/xspec.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace fockbound;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

struct Options {
  std::string config;
  std::string dump;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string x;
  std::string y;
};

json envelope(const std::string& command, const RunConfig& c) {
  return {{"version", FOCKBOUND_VERSION}, {"command", command}, {"config", to_json(c)}};
}

void emit(const json& report, const RunConfig& c) {
  const std::string text = report.dump(2) + "\n";
  if (c.out) {
    std::ofstream f(*c.out);
    if (!f) throw ValidationError("cannot write " + c.out->string());
    f << text;
  } else {
    std::cout << text;
  }
}

std::filesystem::path dump_dir(const RunConfig& c) {
  std::filesystem::create_directories(*c.dump);
  return *c.dump;
}

json phase_json(const Phase& p) { return json::array({p.num(), p.den()}); }

/// Root-of-unity eigenvalue of a parsed spec, if it is a peripheral eigen-element.
std::optional<Phase> symbolic_eigenvalue(const RunConfig& c, const ComplexElement& x) {
  const auto lam = eigen_check_symbolic(c.weights, x, c.tol.eigen_tol);
  if (!lam) return std::nullopt;
  return Phase::from_complex(lam->value(), 4096, 1e-9);
}

/// The closed-form kind matching a product with a single right creation
/// word, with the word and the eigen factor.
struct ClosedMatch {
  ProductKind kind;
  Word word;
  bool eigen_on_left;
};

std::optional<Word> single_right_word(const XSpec& s, SpecAtom::Kind kind) {
  if (s.products.size() != 1 || s.products.front().coeff != Complex{1.0, 0.0}) return std::nullopt;
  const auto& atoms = s.products.front().atoms;
  if (atoms.size() != 1 || atoms.front().kind != kind || atoms.front().word.empty()) return std::nullopt;
  return atoms.front().word;
}

std::optional<ClosedMatch> match_closed_form(const XSpec& x, const XSpec& y) {
  using K = SpecAtom::Kind;
  if (const auto w = single_right_word(y, K::Right)) return ClosedMatch{ProductKind::RightMul, *w, true};
  if (const auto w = single_right_word(y, K::RightStar)) return ClosedMatch{ProductKind::StarRightMul, *w, true};
  if (const auto w = single_right_word(x, K::RightStar)) return ClosedMatch{ProductKind::StarLeftMul, *w, false};
  if (const auto w = single_right_word(x, K::Right)) return ClosedMatch{ProductKind::LeftMul, *w, false};
  return std::nullopt;
}

const std::string& require_spec(const std::optional<std::string>& s, const char* name) {
  if (!s) throw ConfigError(std::string("the command needs an element '") + name + "'");
  return *s;
}

int cmd_verify(const RunConfig& c) {
  json report = envelope("verify", c);
  json suites = json::array();
  bool ok = true;
  for (const auto& entry : all_suites()) {
    const auto r = run_suite(entry, c);
    std::cerr << (r.passed() ? "PASS " : "FAIL ") << r.id << "  " << r.seconds << " s\n";
    ok = ok && r.passed();
    suites.push_back(to_json(r));
  }
  report["suites"] = std::move(suites);
  report["passed"] = ok;
  emit(report, c);
  return ok ? kOk : kFailed;
}

int cmd_product(const RunConfig& c) {
  const auto xs = parse_xspec(require_spec(c.x, "x"), c.n);
  const auto ys = parse_xspec(require_spec(c.y, "y"), c.n);
  const auto xe = to_element(xs);
  const auto ye = to_element(ys);
  const auto lx = symbolic_eigenvalue(c, xe);
  const auto ly = symbolic_eigenvalue(c, ye);
  json report = envelope("product", c);
  report["x"] = {{"spec", xs.source}, {"element", element_json(xe)}};
  report["y"] = {{"spec", ys.source}, {"element", element_json(ye)}};
  if (!lx || !ly) {
    report["error"] = std::string(!lx ? "x" : "y") + " is not a peripheral eigen-element";
    report["passed"] = false;
    emit(report, c);
    return kFailed;
  }
  report["x"]["lambda"] = phase_json(*lx);
  report["y"]["lambda"] = phase_json(*ly);

  const auto p = c.params();
  const UcpMap m(c.weights, p);
  const auto ux = UnitEigenvalue::from_phase(*lx);
  const auto uy = UnitEigenvalue::from_phase(*ly);
  const auto sot = choi_effros_numeric(m, realize(p, xe), ux, realize(p, ye), uy, c.tol.conv_tol, c.max_iter);
  const auto sym = choi_effros_symbolic(c.weights, EigenTagged<Complex>(c.weights, xe, *lx, c.tol.eigen_tol),
                                        EigenTagged<Complex>(c.weights, ye, *ly, c.tol.eigen_tol), c.max_iter);
  const double sym_gap = trust_distance(sot.value, realize(p, sym.value));
  report["sot"] = {{"steps", sot.steps}, {"matrix", operator_json(sot.value)}};
  report["symbolic"] = {{"steps", sym.steps}, {"element", element_json(sym.value)}};
  json distances = {{"sot_vs_symbolic", sym_gap}};
  bool ok = sym_gap < c.tol.agreement_tol;

  if (const auto match = match_closed_form(xs, ys)) {
    const auto& eigen = match->eigen_on_left ? xe : ye;
    const auto& lam = match->eigen_on_left ? *lx : *ly;
    const auto closed = closed_form_product(match->kind, eigen, lam, match->word, c.weights);
    const auto correction = closed - multiply(xe, ye);
    const double gap = trust_distance(sot.value, realize(p, closed));
    report["closed_form"] = {{"kind", to_string(match->kind)},
                             {"word", word_json(match->word)},
                             {"element", element_json(closed)},
                             {"correction", element_json(correction)}};
    distances["sot_vs_closed_form"] = gap;
    ok = ok && gap < c.tol.agreement_tol;
  } else {
    report["closed_form"] = nullptr;
  }
  report["distances"] = distances;
  report["passed"] = ok;
  if (c.dump) {
    const auto dir = dump_dir(c);
    write_csv(sot.value, dir / "product_sot.csv");
    write_csv(realize(p, sym.value), dir / "product_symbolic.csv");
  }
  emit(report, c);
  return ok ? kOk : kFailed;
}

PeripheralSpanBasis configured_basis(const RunConfig& c) {
  if (c.probe.basis.empty()) return PeripheralSpanBasis(c.weights, c.lambda_order, c.word_bound);
  std::vector<std::tuple<Phase, Word, Word>> members;
  for (const auto& s : c.probe.basis) members.push_back(basis_member(parse_xspec(s, c.n)));
  return PeripheralSpanBasis(c.weights, std::move(members));
}

int cmd_commutant(const RunConfig& c) {
  const auto basis = configured_basis(c);
  const auto rep = commutant_probe(basis, c.params(), c.probe.mode, c.tol.svd_tol);
  json labels = json::array();
  for (const auto& e : basis.elements()) labels.push_back(e.label());
  json witness = json::array();
  for (const auto& v : rep.witness) {
    json col = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) col.push_back(complex_json(v[k]));
    witness.push_back(std::move(col));
  }
  json residuals = json::array();
  for (const auto& [label, value] : rep.residuals) residuals.push_back({{"family", label}, {"value", value}});
  const bool gap_ok = !rep.gap_ratio || *rep.gap_ratio < c.tol.gap_tol;
  const bool ok = rep.nullspace_dimension == 1 && gap_ok;
  json report = envelope("commutant", c);
  report["basis"] = labels;
  report["report"] = {
      {"mode", to_string(c.probe.mode)},
      {"nullspace_dimension", rep.nullspace_dimension},
      {"singular_values", rep.singular_values},
      {"witness", witness},
      {"gap_ratio", rep.gap_ratio ? json(*rep.gap_ratio) : json(nullptr)},
      {"identity_distance", rep.identity_distance ? json(*rep.identity_distance) : json(nullptr)},
      {"residuals", residuals},
      {"gram_min_singular", rep.gram_min_singular},
      {"constraint_rows", rep.constraint_rows},
      {"warnings", rep.warnings},
  };
  report["passed"] = ok;
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  if (c.dump) {
    const auto dir = dump_dir(c);
    std::ofstream sv(dir / "singular_values.csv");
    sv << "index,value\n" << std::setprecision(17);
    for (std::size_t k = 0; k < rep.singular_values.size(); ++k) sv << k << ',' << rep.singular_values[k] << '\n';
    std::ofstream rs(dir / "residuals.csv");
    rs << "family,value\n" << std::setprecision(17);
    for (const auto& [label, value] : rep.residuals) rs << '"' << label << "\"," << value << '\n';
  }
  emit(report, c);
  return ok ? kOk : kFailed;
}

int cmd_expectation(const RunConfig& c) {
  const auto xs = parse_xspec(require_spec(c.x, "x"), c.n);
  const auto x = to_element(xs);
  const auto p = c.params();
  const UcpMap m(c.weights, p);
  const int q = c.lambda_order;
  const int nt = c.fourier_terms;
  const auto e = conditional_expectation(c.weights, x, q, nt);
  const auto e_op = realize(p, e);
  const auto numeric = conditional_expectation(m, realize(p, x), q, nt);
  const auto unit = conditional_expectation(c.weights, ComplexElement::identity(), q, nt);
  const json residuals = {
      {"idempotence", trust_norm(realize(p, conditional_expectation(c.weights, e, q, nt) - e))},
      {"fixed_point", trust_norm(realize(p, apply_ucp_symbolic(c.weights, e) - e))},
      {"unitality", trust_norm(realize(p, unit - ComplexElement::identity()))},
      {"numeric_vs_symbolic", trust_distance(numeric, e_op)},
  };
  bool ok = true;
  for (const auto& [k, v] : residuals.items()) ok = ok && v.get<double>() < c.tol.agreement_tol;
  json report = envelope("expectation", c);
  report["x"] = {{"spec", xs.source}, {"element", element_json(x)}};
  report["expectation"] = {{"element", element_json(e)}, {"matrix", operator_json(e_op)}};
  report["residuals"] = residuals;
  report["passed"] = ok;
  if (c.dump) write_csv(e_op, dump_dir(c) / "expectation.csv");
  emit(report, c);
  return ok ? kOk : kFailed;
}

int cmd_spectrum(const RunConfig& c) {
  const auto xs = parse_xspec(require_spec(c.x, "x"), c.n);
  const auto x = to_element(xs);
  const auto p = c.params();
  const UcpMap m(c.weights, p);
  const auto op = realize(p, x);
  const auto lam = detect_peripheral_eigenvalue(m, op, c.tol.eigen_tol);
  const auto sym = eigen_check_symbolic(c.weights, x, c.tol.eigen_tol);
  json report = envelope("spectrum", c);
  report["x"] = {{"spec", xs.source}, {"element", element_json(x)}};
  if (lam) {
    const auto phase = Phase::from_complex(lam->value(), 4096, 1e-9);
    report["lambda"] = complex_json(lam->value());
    report["lambda_root"] = phase ? phase_json(*phase) : json(nullptr);
    report["residual"] = trust_distance(m.apply(op), lam->value() * op);
  } else {
    report["lambda"] = nullptr;
    report["lambda_root"] = nullptr;
    report["residual"] = nullptr;
  }
  report["symbolic_lambda"] = sym ? complex_json(sym->value()) : json(nullptr);
  const bool agree = lam.has_value() == sym.has_value() &&
                     (!lam || std::abs(lam->value() - sym->value()) < c.tol.eigen_tol);
  report["passed"] = agree;
  if (c.dump) write_csv(op, dump_dir(c) / "spectrum_input.csv");
  emit(report, c);
  return agree ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peripheral Poisson boundary engine for the full Fock space"};
  app.set_version_flag("--version", std::string(FOCKBOUND_VERSION));
  app.require_subcommand(1);
  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"verify", "run every identity suite"},
      {"product", "Choi-Effros product of the config elements x and y"},
      {"commutant", "relative commutant probe on the span basis"},
      {"expectation", "conditional expectation of x with axiom residuals"},
      {"spectrum", "peripheral eigenvalue of x"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON run configuration")->required();
    sub->add_option("--dump", opt.dump, "directory for CSV dumps");
    sub->add_option("--seed", opt.seed, "seed for randomized suites");
    sub->add_option("--out", opt.out, "write the report here instead of stdout");
    if (name != "verify" && name != "commutant") sub->add_option("--x", opt.x, "element spec, overrides config x");
    if (name == "product") sub->add_option("--y", opt.y, "element spec, overrides config y");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    cfg = load_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    if (!opt.dump.empty()) cfg.dump = opt.dump;
    if (!opt.out.empty()) cfg.out = opt.out;
    if (!opt.x.empty()) cfg.x = opt.x;
    if (!opt.y.empty()) cfg.y = opt.y;
    validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int code = kFailed;
  try {
    if (command == "verify") code = cmd_verify(cfg);
    if (command == "product") code = cmd_product(cfg);
    if (command == "commutant") code = cmd_commutant(cfg);
    if (command == "expectation") code = cmd_expectation(cfg);
    if (command == "spectrum") code = cmd_spectrum(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << command << " finished in " << secs << " s\n";
  return code;
}
