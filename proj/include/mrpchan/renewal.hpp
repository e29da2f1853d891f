#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mrpchan/filtering.hpp"
#include "mrpchan/intensity.hpp"
#include "mrpchan/kernel.hpp"
#include "mrpchan/models.hpp"

namespace mrpchan {

/// Values per state on the uniform grid t_i = i h, i = 0..n.
struct GridFunction {
  double h = 0.0;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;  // [state][i]

  std::size_t points() const { return values.empty() ? 0 : values[0].size(); }
  double t(std::size_t i) const { return static_cast<double>(i) * h; }
  /// Linear interpolation; t must lie on the grid range.
  double at(std::size_t state, double t) const;
};

/// How the marginal process starts at t = 0.
/// observed: a marginal event at T_0 = 0 into a mark drawn from eta (known to the observer).
/// transient: a hidden start; `first` holds the first-event densities ftilde per mark.
struct RenewalStart {
  bool observed = true;
  std::vector<double> eta;
  std::vector<ExpPoly> first;
};

RenewalStart observed_start(const SemiMarkovKernel& k, std::vector<double> eta);
RenewalStart transient_start(std::vector<ExpPoly> first);

/// r(t) = ftilde(t) + int_0^t r(s) q(t - s) ds by product integration with a
/// piecewise-linear r and exact kernel moments; O(h^2).
GridFunction volterra_solve(const SemiMarkovKernel& k, const RenewalStart& start, double T, double h);
/// Same on h and h/2; throws RefinementError when the grids disagree by more than tol (max norm, relative).
GridFunction volterra_solve_checked(const SemiMarkovKernel& k, const RenewalStart& start, double T, double h,
                                    double tol);

/// Richardson check on shared grid points: ||r_h - r_{h/2}|| / ||r_{h/2} - r_{h/4}||.
struct MeshConvergence {
  double diff_coarse = 0.0;
  double diff_fine = 0.0;
  double ratio = 0.0;
};
MeshConvergence volterra_mesh_convergence(const SemiMarkovKernel& k, const RenewalStart& start, double T, double h);

/// Laplace route: r* = ftilde* (I - q*)^-1, inverted. Entries carry a constant
/// term (the asymptotic rate 1/m_z) for recurrent states.
std::vector<ExpPoly> renewal_density_laplace(const SemiMarkovKernel& k, const RenewalStart& start);

/// Marginal MrP together with the output-arrival marks and its start.
struct MarginalSystem {
  FilterOutput sys;
  std::vector<std::size_t> targets;
  RenewalStart start;
  /// Densities from the hidden start over the filtered states (transient start only).
  std::vector<ExpPoly> start_densities;
  /// Theta_0 weights over the filtered states (observed start only).
  std::vector<double> theta0;
  /// Filtered state entered by the full-kernel transition y -> z, or -1 when unobserved.
  std::vector<std::vector<long>> entered;
};

/// Observed start when the initial state has an observable copy in the filtered
/// space, otherwise a transient start.
MarginalSystem make_marginal_system(const SemiMarkovKernel& k, const MarginalSpec& spec,
                                    const std::vector<std::string>& targets, const std::string& initial);

struct ChannelSystems {
  MarginalSystem joint;
  MarginalSystem output;
};
ChannelSystems prepare_channel(const Channel& c);

/// Grid curve t -> E[phi(lambda_t)] with lambda_t the intensity of all target marks
/// together and phi(u) = u ln u.
struct PhiCurve {
  double h = 0.0;
  std::vector<double> values;
  double t(std::size_t i) const { return static_cast<double>(i) * h; }
};

/// E[phi](t) = g0(t) + sum_y int_0^t g_y(v) r_y(t - v) dv with
/// g_y = Q_y ln(Q_y / S_y), Q_y the density of a target event from y.
/// Requires an injective coarse-graining.
PhiCurve phi_evolution(const MarginalSystem& m, double T, double h);
/// Pointwise value by adaptive quadrature (independent of the grid).
double phi_value(const MarginalSystem& m, double t);

/// Trapezoidal integral of a curve up to T with a Richardson estimate from the
/// curve at half the step.
struct TermIntegral {
  double value = 0.0;      // extrapolated
  double coarse = 0.0;     // trapezoid on h
  double fine = 0.0;       // trapezoid on h/2
  double error = 0.0;      // |fine - coarse| / 3
};
double trapezoid(const PhiCurve& c, double T);
TermIntegral integrate_mi_term(const PhiCurve& coarse, const PhiCurve& fine, double T);
TermIntegral mi_term_grid(const MarginalSystem& m, double T, double h);

/// int_0^T E[phi](t) dt = int_0^T [g0(v) + sum_y g_y(v) R_y(T - v)] dv by adaptive quadrature,
/// R_y the antiderivative of r_y.
double mi_term_exact(const MarginalSystem& m, double T);

/// Exact finite-horizon mutual information I(X_[0,T]; Y_[0,T]) as the difference
/// of the joint and output terms.
struct ExactMI {
  double mi = 0.0;
  double joint_term = 0.0;
  double output_term = 0.0;
};
ExactMI mi_exact(const ChannelSystems& c, double T);

/// Default grid step: shortest mean sojourn over 200.
double default_step(const SemiMarkovKernel& k);

}  // namespace mrpchan
