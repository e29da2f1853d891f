#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mrpchan/filtering.hpp"

namespace mrpchan {

/// Filter statistic Theta_n: normalized log-weights over the filtered states.
struct ThetaState {
  std::vector<double> log_w;  // -inf marks zero weight
  std::size_t count = 0;      // observed marginal events
  double last_event = 0.0;    // time of the last event; V_t = t - last_event
  bool before_first = false;  // no marginal event observed yet

  std::vector<double> weights() const;
};

struct HazardEval {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
};

/// log sum exp over a span; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

/// Point mass on filtered state alpha.
ThetaState theta_point(const FilterOutput& sys, std::size_t alpha, double t0 = 0.0);
/// Normalized nonnegative weights over the filtered states.
ThetaState theta_from_weights(const FilterOutput& sys, const std::vector<double>& w, double t0 = 0.0);
/// Uniform weights on g^-1(mark): the first event coincides with T_0.
ThetaState theta_maxent(const FilterOutput& sys, std::size_t mark, double t0 = 0.0);
/// First marginal event (mark, t0) observed after a start in xi: weights
/// proportional to the start-row densities at t0, restricted to g^-1(mark).
/// start_row comes from transient_densities().
ThetaState theta_first_event(const FilterOutput& sys, const std::vector<ExpPoly>& start_row, std::size_t mark,
                             double t0);

/// Theta_n = Theta_{n-1} qbar(mark, W) / <Theta_{n-1}, fbar(mark, W)>, in the log domain.
/// Throws DegeneracyError when the observation has zero likelihood.
ThetaState theta_update(const FilterOutput& sys, const ThetaState& theta, std::size_t mark, double waiting);
/// Log-likelihood increment log <Theta, fbar(mark, W)> of the same update.
double log_event_density(const FilterOutput& sys, const ThetaState& theta, std::size_t mark, double waiting);
/// log <Theta, S(v)>.
double log_survival(const FilterOutput& sys, const ThetaState& theta, double v);

/// Lambda(v, Theta) = <Theta, sum_{z in marks} fbar(z, v)> / <Theta, S(v)>.
HazardEval hazard_recurrent(const FilterOutput& sys, const ThetaState& theta, std::span<const std::size_t> marks,
                            double v);
HazardEval hazard_recurrent(const FilterOutput& sys, const ThetaState& theta, std::size_t mark, double v);

/// Lambda^0_z(t, xi) = ftilde_{xi z}(t) / (1 - int_0^t sum_y ftilde_{xi y}).
HazardEval hazard_transient(const std::vector<ExpPoly>& row, std::span<const std::size_t> marks, double t);
HazardEval hazard_transient(const std::vector<ExpPoly>& row, std::size_t mark, double t);

/// Marginal event (mark, time).
struct MarkedEvent {
  std::size_t mark;
  double time;
};

/// log of delta(t - v - t_n) <Theta_0 qbar(z_1, t_1 - t_0) ... qbar(z_n, t_n - t_{n-1}), S(t - t_n)>,
/// evaluated recursively. theta0.last_event is t_0.
double path_log_density(const FilterOutput& sys, const ThetaState& theta0, const std::vector<MarkedEvent>& events,
                        double t);

/// Incremental filter bound to one marginal system; used by the simulators.
class FilterTracker {
 public:
  FilterTracker(const FilterOutput& sys, ThetaState theta0) : sys_(&sys), theta_(std::move(theta0)) {}

  const ThetaState& theta() const noexcept { return theta_; }
  double log_likelihood() const noexcept { return loglik_; }
  /// Left-limit log-hazard of the given marks at time t.
  double log_hazard(std::span<const std::size_t> marks, double t) const;
  /// Log-likelihood of the path up to t, including the survival of the open interval.
  double log_likelihood_at(double t) const;
  void observe(std::size_t mark, double t);

 private:
  const FilterOutput* sys_;
  ThetaState theta_;
  double loglik_ = 0.0;
};

}  // namespace mrpchan
