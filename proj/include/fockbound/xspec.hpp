#pragma once

// Element specifications typed on the command line and in configs.
//
//   atoms    x_i  x_{-1}  x_{re,im}  x_root{q,p}  r_I  r*_I  l_I  l*_I  p0  1
//   words    digits (r_12), braces (r_{1,12}) or () for the empty word
//   scalars  0.5  -2  0.5i  i  (re,im)   as prefixes of a product
//   postfix  a trailing * takes the adjoint of the preceding atom
//
// Products are written by juxtaposition and sums with + and -. The phase of an
// x atom must be a root of unity.

#include "fockbound/algebra.hpp"

#include <string>
#include <tuple>
#include <vector>

namespace fockbound {

struct SpecAtom {
  enum class Kind { Identity, Peripheral, Left, LeftStar, Right, RightStar, Vacuum };
  Kind kind = Kind::Identity;
  Word word;
  Phase phase{};

  ComplexElement element() const;
};

struct SpecProduct {
  Complex coeff{1.0, 0.0};
  std::vector<SpecAtom> atoms;
};

struct XSpec {
  std::string source;
  std::vector<SpecProduct> products;
};

/// ParseError on malformed input; RangeError when a letter is outside 1..n.
XSpec parse_xspec(const std::string& text, int n);
ComplexElement to_element(const XSpec& spec);
ComplexElement parse_element(const std::string& text, int n);

/// Reads a span-basis member written as x_theta r_I r*_J (any factor may be
/// omitted, coefficient one). ParseError for anything else.
std::tuple<Phase, Word, Word> basis_member(const XSpec& spec);

}  // namespace fockbound
