#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrpchan/exp_poly.hpp"
#include "mrpchan/polynomial.hpp"

namespace mrpchan {

/// Relative tolerance for declaring a numerator root to cancel a denominator root.
inline constexpr double kCancelTol = 1e-8;
/// Conditioning threshold on the product of pole separations.
inline constexpr double kConditioningTol = 1e-10;

/// Rational function num(s)/den(s) of the Laplace variable with monic denominator.
///
/// The denominator is carried together with its roots (poles). Poles coming from
/// kernel rates are exact, so cancellation and partial fractions never re-solve
/// for roots of expanded products. Intermediate values may be improper
/// (e.g. (I - d*)^-1 has a unit part); densities require is_strictly_proper().
class RationalLT {
 public:
  RationalLT() : num_(), den_(Poly::constant(1.0)) {}
  /// Poles are computed from den.
  RationalLT(Poly num, Poly den);
  /// den = prod (s - pole)^multiplicity.
  RationalLT(Poly num, std::vector<Root> poles);
  static RationalLT zero() { return {}; }
  static RationalLT one() { return constant(1.0); }
  static RationalLT constant(double c) { return RationalLT(Poly::constant(c), std::vector<Root>{}); }

  const Poly& num() const noexcept { return num_; }
  const Poly& den() const noexcept { return den_; }
  const std::vector<Root>& poles() const noexcept { return poles_; }
  bool is_zero() const noexcept { return num_.is_zero(); }
  bool is_strictly_proper() const noexcept { return num_.degree() < den_.degree(); }

  cplx operator()(cplx s) const { return num_(s) / den_(s); }
  double operator()(double s) const { return num_(s) / den_(s); }

  RationalLT operator+(const RationalLT& o) const;
  RationalLT operator-(const RationalLT& o) const;
  RationalLT operator*(const RationalLT& o) const;
  RationalLT operator/(const RationalLT& o) const;
  RationalLT operator*(double s) const;

  /// Cancel numerator roots against the tracked poles.
  RationalLT reduced() const;

  std::string to_string() const;

 private:
  Poly num_;
  Poly den_;
  std::vector<Root> poles_;
};

using RationalMatrix = std::vector<std::vector<RationalLT>>;

/// Laplace transform of an exponential polynomial.
RationalLT lt_of(const ExpPoly& d);

struct Inversion {
  ExpPoly f;
  bool ill_conditioned = false;
  /// |prod_{i<j} (r_j - r_i)| relative to scale^(number of pairs).
  double separation = 1.0;
};

/// Inverse transform by partial fractions. A simple pole at the origin is
/// accepted only with allow_zero_pole (renewal densities carry one).
Inversion invert_lt_checked(const RationalLT& r, bool allow_zero_pole = false);
ExpPoly invert_lt(const RationalLT& r, bool allow_zero_pole = false);

/// Entrywise values at real s.
Eigen::MatrixXd evaluate(const RationalMatrix& m, double s);

/// (I - D)^-1 = L adj(M) / det(M) with M = L (I - D) a polynomial matrix and L the
/// least common denominator of D; no convergence check.
RationalMatrix inverse_identity_minus(const RationalMatrix& d);

/// sum_k D^k = (I - D)^-1; throws ConvergenceError when the spectral radius of D(0)
/// is not below 1 - 1e-9.
RationalMatrix neumann_series(const RationalMatrix& d);

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix add(const RationalMatrix& a, const RationalMatrix& b);

}  // namespace mrpchan
