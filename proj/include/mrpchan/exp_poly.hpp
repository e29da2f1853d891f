#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mrpchan {

using cplx = std::complex<double>;

/// One term  coeff * t^power * exp(-rate * t).
struct ExpTerm {
  cplx coeff;
  int power = 0;
  cplx rate;
};

/// Relative tolerance under which two rates are considered equal.
inline constexpr double kRateMergeTol = 1e-9;
/// Largest polynomial power produced by products/convolutions.
inline constexpr int kMaxPower = 64;

/// Real-valued exponential polynomial  f(t) = sum_k c_k t^{m_k} e^{-rho_k t}, t >= 0.
///
/// Complex terms are expected in conjugate pairs so that f is real; evaluation
/// returns the real part. Terms with rate 0 are allowed (constants and
/// polynomials, e.g. renewal functions); densities require Re(rate) > 0 for
/// every term. The family is closed under addition, scaling, pointwise
/// product and convolution.
class ExpPoly {
 public:
  ExpPoly() = default;
  explicit ExpPoly(std::vector<ExpTerm> terms);

  /// weight * exp(-rate t); weight defaults to rate (a probability density).
  static ExpPoly exponential(double rate);
  static ExpPoly exponential(double rate, double weight);
  /// Erlang(shape, rate) density.
  static ExpPoly erlang(int shape, double rate);
  static ExpPoly constant(double c);

  const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  double operator()(double t) const;
  /// Bound on the rounding error of operator()(t): 64 eps sum_k |c_k| t^m_k e^(-Re rho_k t).
  double rounding_bound(double t) const;
  /// log f(t), or -inf where f(t) <= 0. Stable for large t.
  double log_value(double t) const;

  /// Integral over [0, inf). Requires every Re(rate) > 0.
  double mass() const;
  /// Integral over [0, t].
  double cumulative(double t) const;
  /// Integral of t * f(t) over [0, inf).
  double first_moment() const;

  /// t -> integral over [t, inf) as an exponential polynomial.
  ExpPoly tail() const;
  /// t -> integral over [0, t]; carries a rate-0 constant term.
  ExpPoly antiderivative() const;
  ExpPoly derivative() const;

  /// Laplace transform evaluated at s.
  cplx laplace(cplx s) const;

  /// Smallest Re(rate) over the terms (inf for the zero function).
  double slowest_decay() const;
  /// Largest |rate|.
  double fastest_rate() const;
  bool all_rates_positive() const;
  bool is_single_exponential() const;

  ExpPoly operator+(const ExpPoly& o) const;
  ExpPoly operator-(const ExpPoly& o) const;
  ExpPoly operator*(double s) const;
  ExpPoly& operator+=(const ExpPoly& o);

  /// Pointwise product.
  ExpPoly times(const ExpPoly& o) const;
  /// (f * g)(t) = integral_0^t f(u) g(t-u) du.
  ExpPoly convolve(const ExpPoly& o) const;

  std::string to_string() const;

 private:
  void normalize();
  std::vector<ExpTerm> terms_;
};

inline ExpPoly operator*(double s, const ExpPoly& f) { return f * s; }

/// Sum of a span of exponential polynomials.
ExpPoly sum(std::span<const ExpPoly> fs);

bool rates_equal(cplx a, cplx b) noexcept;

}  // namespace mrpchan
