#pragma once

// Metric-weight expressions phi(z) on the standard affine chart of CP^m.
//
// Grammar (whitespace ignored):
//   expr    := term   (('+' | '-') term)*
//   term    := unary  (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' integer)?
//   primary := number | variable | '(' expr ')'
//   variable:= x1 | y1 | x2 | y2 | r2        (x_j = Re z_j, y_j = Im z_j, r2 = |z|^2)
//
// Example: "0.1*r2/(1+r2)".

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "szlab/jet.hpp"

namespace szlab {

class WeightExpr {
 public:
  /// The zero weight (unperturbed Fubini-Study metric).
  WeightExpr();

  /// Throws WeightParseError with the offending character position. Variables
  /// x2/y2 are rejected when m == 1.
  static WeightExpr parse(std::string_view text, int m);

  const std::string& text() const { return text_; }
  bool is_zero() const { return zero_; }

  double value(std::span<const std::complex<double>> w) const;

  /// Jet in the real coordinates of w; `w` itself is given as jets so that
  /// callers can differentiate through a change of chart.
  Jet2 jet(std::span<const CJet> w) const;

  /// First Wirtinger derivatives d(phi)/dw_j at w.
  std::vector<std::complex<double>> gradient(std::span<const std::complex<double>> w) const;

  struct Node;

 private:
  std::string text_;
  bool zero_ = true;
  std::shared_ptr<const Node> root_;
};

}  // namespace szlab
