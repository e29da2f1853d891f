#pragma once

#include <complex>
#include <vector>

namespace mrpchan {

using cplx = std::complex<double>;

/// Degree cap for every polynomial the library builds.
inline constexpr int kMaxDegree = 64;
/// Roots closer than this (relative) are treated as one repeated root.
inline constexpr double kRootClusterTol = 1e-6;

/// A root and its multiplicity.
struct Root {
  cplx value;
  int multiplicity = 1;
};

/// Real polynomial, coefficients in ascending powers.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<double> coeffs);
  static Poly constant(double c) { return Poly({c}); }
  /// (s + a)
  static Poly linear(double a) { return Poly({a, 1.0}); }
  /// Monic real polynomial with the given roots; complex roots must come in conjugate pairs.
  static Poly from_roots(const std::vector<Root>& roots);

  const std::vector<double>& coeffs() const noexcept { return c_; }
  /// -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  double leading() const { return c_.back(); }
  double operator[](int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : 0.0; }

  double operator()(double s) const;
  cplx operator()(cplx s) const;
  /// sum |c_k| |s|^k, the natural scale for judging |p(s)| ~ 0.
  double magnitude(cplx s) const;
  Poly derivative() const;

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(double s) const;

  /// Drop leading coefficients with |c| <= rel * max|c|.
  Poly trimmed(double rel) const;

  /// Roots via the balanced companion matrix, one Newton polish step,
  /// conjugate symmetrisation and clustering of repeated roots.
  std::vector<Root> roots() const;

 private:
  void strip();
  std::vector<double> c_;
};

/// Quotient and remainder of a / b.
std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);

}  // namespace mrpchan
