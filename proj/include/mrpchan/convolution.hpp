#pragma once

#include <functional>
#include <vector>

#include "mrpchan/exp_poly.hpp"

namespace mrpchan {

/// Running product integration of an exponential-polynomial kernel K against a
/// signal on the uniform grid t_i = i h:  (K * y)(t_i) = int_0^{t_i} K(t_i - s) y(s) ds.
///
/// Each term c t^m e^{-rho t} carries the moments
///   S^(l)_i = int_0^{t_i} (t_i - s)^l e^{-rho (t_i - s)} y(s) ds,  l = 0..m,
/// advanced by  S^(l)_{i+1} = e^{-rho h} sum_a C(l,a) h^(l-a) S^(a)_i + local part,
/// so a step costs O(terms * m^2) regardless of i.
class ExpKernelConvolution {
 public:
  ExpKernelConvolution(const ExpPoly& kernel, double h);

  double h() const noexcept { return h_; }
  /// Current value (K * y)(t_i).
  double value() const noexcept { return value_; }

  /// Piecewise-linear signal: open a step given y(t_i); the value at t_{i+1}
  /// is  pending() + weight() * y(t_{i+1}).
  void begin_linear(double y_i);
  double pending() const noexcept { return pending_; }
  double weight() const noexcept { return weight_; }
  void commit_linear(double y_next);

  /// Signal known pointwise: the local integral over [t_i, t_{i+1}] is evaluated
  /// by Gauss-Legendre quadrature (graded towards 0 on the first step).
  void step_exact(const std::function<double(double)>& y);

  /// Step with precomputed node values of y on [t_i, t_{i+1}] (see nodes()).
  void step_nodes(const std::vector<double>& y_at_nodes);
  /// Quadrature nodes (absolute times) used for step number i (0-based).
  std::vector<double> nodes(std::size_t step) const;

 private:
  struct Term {
    cplx coeff;
    int power;
    cplx rate;
    cplx decay;                      // e^{-rho h}
    std::vector<cplx> s;             // S^(l)
    std::vector<cplx> next;          // pending S^(l) without the y_{i+1} part
    std::vector<cplx> alpha, beta;   // local weights for y_{i+1}, y_i
  };
  void propagate();
  double combine(const std::vector<Term>& terms, bool use_next) const;

  double h_;
  std::size_t step_ = 0;
  double value_ = 0.0;
  double pending_ = 0.0;
  double weight_ = 0.0;
  std::vector<Term> terms_;
  std::vector<std::vector<double>> binom_;
};

}  // namespace mrpchan
