#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrpchan/exp_poly.hpp"

namespace mrpchan {

/// Mass tolerance for sub-stochastic rows and unit-mass densities.
inline constexpr double kMassTol = 1e-9;
/// Pointwise negativity tolerance on the validation grid, on top of the evaluation rounding bound.
inline constexpr double kNegTol = 1e-10;
/// Points of the log-spaced validation grid.
inline constexpr int kValidationPoints = 1024;

using DensityMatrix = std::vector<std::vector<ExpPoly>>;

/// Semi-Markov kernel given by its densities q_yz(t) on a labelled state space.
///
/// Immutable after construction. Construction validates sub-stochastic rows and
/// pointwise nonnegativity on a log-spaced grid up to 20 mean sojourn times.
class SemiMarkovKernel {
 public:
  SemiMarkovKernel() = default;
  SemiMarkovKernel(std::vector<std::string> states, DensityMatrix q);

  std::size_t size() const noexcept { return states_.size(); }
  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::string& label(std::size_t i) const { return states_.at(i); }
  /// Index of a label; throws InputError when absent.
  std::size_t index(const std::string& label) const;

  const ExpPoly& q(std::size_t y, std::size_t z) const { return q_[y][z]; }
  const DensityMatrix& densities() const noexcept { return q_; }
  const Eigen::MatrixXd& P() const noexcept { return p_; }

  /// F_y(inf) = 1 - sum_z P_yz.
  double defect(std::size_t y) const { return defect_[y]; }
  /// f_y = sum_z q_yz.
  const ExpPoly& sojourn(std::size_t y) const { return sojourn_[y]; }
  /// S_y(t) = 1 - int_0^t f_y; carries a constant term when the row is defective.
  const ExpPoly& survival(std::size_t y) const { return survival_[y]; }
  /// Mean sojourn int_0^inf S_y; infinite for defective rows.
  double mean_sojourn(std::size_t y) const { return mean_sojourn_[y]; }

  /// Same densities under new labels.
  SemiMarkovKernel relabelled(std::vector<std::string> states) const;

 private:
  std::vector<std::string> states_;
  DensityMatrix q_;
  Eigen::MatrixXd p_;
  std::vector<double> defect_;
  std::vector<ExpPoly> sojourn_;
  std::vector<ExpPoly> survival_;
  std::vector<double> mean_sojourn_;
};

/// Off-diagonal jump rates of a Markov jump process; the diagonal is ignored.
struct GeneratorSpec {
  std::vector<std::string> states;
  Eigen::MatrixXd rates;
};

/// q_yz(t) = rate(y,z) exp(-u_y t) with u_y the exit rate of y.
SemiMarkovKernel smk_from_generator(const GeneratorSpec& g);

/// q_yz(t) = P_yz ftilde_yz(t); every used ftilde must be a probability density.
SemiMarkovKernel smk_from_conditional(std::vector<std::string> states, const Eigen::MatrixXd& P,
                                      const DensityMatrix& ftilde);

/// Competing clocks: q_yz(t) = f_yz(t) prod_{x != z} (1 - F_yx(t)). Zero entries mean no clock.
SemiMarkovKernel smk_from_competing(std::vector<std::string> states, const DensityMatrix& clocks);

}  // namespace mrpchan
