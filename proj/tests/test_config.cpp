#include "fockbound/config.hpp"
#include "fockbound/xspec.hpp"

#include <doctest.h>

using namespace fockbound;
using nlohmann::json;

namespace {

json base() { return json{{"n", 2}, {"depth", 6}, {"lambda_order", 2}, {"word_bound", 2}}; }

json with(json j, const std::string& key, json value) {
  j[key] = std::move(value);
  return j;
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c = parse_config(json::object());
  CHECK(c.n == 2);
  CHECK(c.depth == 8);
  CHECK(c.lambda_order == 4);
  CHECK(c.word_bound == 2);
  CHECK(c.fourier_terms == 4);
  CHECK(c.tol.svd_tol == 1e-8);
  CHECK(c.weights.values() == std::vector<double>{0.5, 0.5});
  CHECK(c.probe.mode == ProbeMode::Generators);
  CHECK(c.probe.basis.empty());
}

TEST_CASE("weights") {
  CHECK_THROWS_AS(parse_config(with(base(), "weights", json::array({0.7, 0.2}))), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "weights", json::array({0.5, 0.25, 0.25}))), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "weights", "skewed")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "weights", json::array({"1/2", 0.5}))), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "weights", json::array({"1/x", "1/2"}))), ConfigError);
  const RunConfig a = parse_config(with(base(), "weights", json::array({0.3, 0.7})));
  CHECK_FALSE(a.weights.has_exact());
  CHECK(a.weights(2) == doctest::Approx(0.7));
  const RunConfig b = parse_config(with(base(), "weights", json::array({"1/3", "2/3"})));
  REQUIRE(b.weights.has_exact());
  CHECK(b.weights.exact(1) == Rational(1, 3));
  CHECK(to_json(b)["weights"] == json::array({"1/3", "2/3"}));
}

TEST_CASE("truncation invariants") {
  json shallow = base();
  shallow["depth"] = 1;
  CHECK_THROWS_AS(parse_config(shallow), ConfigError);
  shallow["depth"] = 3;
  CHECK_THROWS_AS(parse_config(shallow), ConfigError);
  shallow["depth"] = 4;
  CHECK_NOTHROW(parse_config(shallow));
  CHECK_THROWS_AS(parse_config(with(base(), "depth", 40)), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "n", 0)), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "fourier_terms", 3)), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "fourier_terms", 8)), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "max_iter", 0)), ConfigError);
}

TEST_CASE("strict keys and types") {
  CHECK_THROWS_AS(parse_config(with(base(), "colour", "blue")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "depth", "six")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "tolerances", {{"svd", 1e-8}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "tolerances", {{"svd_tol", -1.0}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "probe", {{"mode", "sideways"}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "probe", {{"basis", json::array({"r_1 + r_2"})}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "suite", {{"shallow_depth", 9}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "x", "r_3")), ConfigError);
  CHECK_THROWS_AS(parse_config(with(base(), "x", "x_{0.3,0.2}")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("resolved configuration round-trips") {
  json j = base();
  j["weights"] = json::array({0.25, 0.75});
  j["tolerances"] = {{"gap_tol", 1e-5}};
  j["probe"] = {{"mode", "center"}, {"basis", json::array({"1", "x_{-1}"})}};
  j["x"] = "x_i r_1";
  const RunConfig c = parse_config(j);
  json resolved = to_json(c);
  resolved.erase("outputs");
  resolved.erase("weights_resolved");
  const RunConfig again = parse_config(resolved);
  CHECK(to_json(again) == to_json(c));
  CHECK(again.tol.gap_tol == 1e-5);
  CHECK(again.probe.mode == ProbeMode::Center);
  CHECK(again.probe.basis.size() == 2);
}

TEST_CASE("element specs") {
  const Phase i4 = Phase::root(4, 1);
  CHECK(parse_element("x_i", 2) == ComplexElement::peripheral(i4));
  CHECK(parse_element("x_i x_i", 2) == ComplexElement::peripheral(Phase::root(2, 1)));
  CHECK(parse_element("x_{-1}", 2) == ComplexElement::peripheral(Phase::root(2, 1)));
  CHECK(parse_element("x_root{8,3}", 2) == ComplexElement::peripheral(Phase::root(8, 3)));
  CHECK(parse_element("x_{0,1}", 2) == ComplexElement::peripheral(i4));
  CHECK(parse_element("r_12", 2) == ComplexElement::r_word(Word{1, 2}));
  CHECK(parse_element("r_{1,2}", 2) == ComplexElement::r_word(Word{1, 2}));
  CHECK(parse_element("r*_21", 2) == ComplexElement::r_word_star(Word{2, 1}));
  CHECK(parse_element("r_21*", 2) == ComplexElement::r_word_star(Word{2, 1}));
  CHECK(parse_element("l_1 l*_2", 2) == ComplexElement::l_word(Word{1}) * ComplexElement::l_word_star(Word{2}));
  CHECK(parse_element("p0", 2) == ComplexElement::vacuum());
  CHECK(parse_element("r_()", 2) == ComplexElement::identity());
  CHECK(parse_element("1", 2) == ComplexElement::identity());
  CHECK(parse_element("2 r_1 - 0.5i p0", 2) ==
        ComplexElement::r_word(Word{1}) * Complex(2.0) - ComplexElement::vacuum() * Complex(0.0, 0.5));
  CHECK(parse_element("(1,2) x_i", 2) == ComplexElement::peripheral(i4) * Complex(1.0, 2.0));
  // r_1 x_i = -i x_i r_1
  CHECK(parse_element("r_1 x_i", 2) ==
        ComplexElement::peripheral(i4) * ComplexElement::r_word(Word{1}) * Complex(0.0, -1.0));
  CHECK_THROWS_AS(parse_element("r_3", 2), RangeError);
  CHECK_THROWS_AS(parse_element("x_(", 2), ParseError);
  CHECK_THROWS_AS(parse_element("q_1", 2), ParseError);
  CHECK_THROWS_AS(parse_element("x_{0.3,0.2}", 2), ParseError);
  CHECK_THROWS_AS(parse_element("", 2), ParseError);
}

TEST_CASE("span basis members") {
  const auto [lam, i, j] = basis_member(parse_xspec("x_i r_12 r*_2", 2));
  CHECK(lam == Phase::root(4, 1));
  CHECK(i == Word{1, 2});
  CHECK(j == Word{2});
  const auto [l1, i1, j1] = basis_member(parse_xspec("1", 2));
  CHECK(l1.is_one());
  CHECK(i1.empty());
  CHECK(j1.empty());
  CHECK_THROWS_AS(basis_member(parse_xspec("r_1 + r_2", 2)), ParseError);
  CHECK_THROWS_AS(basis_member(parse_xspec("2 r_1", 2)), ParseError);
  CHECK_THROWS_AS(basis_member(parse_xspec("r*_1 r_1", 2)), ParseError);
}

TEST_CASE("element json") {
  const auto x = ComplexElement::peripheral(Phase::root(4, 1)) * ComplexElement::r_word(Word{1, 2}) * Complex(0.5) +
                 ComplexElement::vacuum();
  const json expected = json::parse(R"([
    {"coeff_re": 0.5, "coeff_im": 0.0, "lc": [], "rc": [1, 2], "eps": 0, "ra": [], "la": [], "phase": [1, 4]},
    {"coeff_re": 1.0, "coeff_im": 0.0, "lc": [], "rc": [], "eps": 1, "ra": [], "la": []}
  ])");
  const json got = element_json(x);
  REQUIRE(got.size() == 2);
  // terms follow the monomial shape order, which compares the phase first
  CHECK(got[0] == expected[1]);
  CHECK(got[1] == expected[0]);

  const ExactElement e = ExactElement::r_word(Word{2}) * GaussianRational(Rational(1, 3), Rational(-1));
  const json ge = element_json(e);
  REQUIRE(ge.size() == 1);
  CHECK(ge[0]["rc"] == json::array({2}));
  CHECK(ge[0].contains("coeff_exact"));
  CHECK(ge[0]["coeff_re"].get<double>() == doctest::Approx(1.0 / 3.0));
  CHECK(ge[0]["coeff_im"].get<double>() == doctest::Approx(-1.0));

  const TruncationParams p(2, 2);
  const json op = operator_json(realize(p, ComplexElement::r_word(Word{1})));
  CHECK(op["depth"] == 2);
  CHECK(op["trust"] == 2);
  CHECK(op["entries"].size() == 3);
  CHECK(complex_json(Complex(1.0, -2.0)) == json::array({1.0, -2.0}));
}
