#include "mrpchan/intensity.hpp"

#include <algorithm>
#include <cmath>

#include "mrpchan/error.hpp"

namespace mrpchan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void normalize(std::vector<double>& lw, long mark, double waiting) {
  const double z = log_sum_exp(lw);
  if (!std::isfinite(z)) throw DegeneracyError("filter statistic has no mass left", mark, waiting);
  for (double& x : lw) x -= z;
}

HazardEval make_hazard(double log_num, double log_den) {
  if (!std::isfinite(log_den)) throw NumericError("hazard undefined: survival mass vanished");
  HazardEval h;
  h.log_value = log_num - log_den;
  h.value = std::exp(h.log_value);
  return h;
}

void check_mark(const FilterOutput& sys, std::size_t mark) {
  if (mark >= sys.marks().size()) throw InputError("mark index out of range");
}

}  // namespace

std::vector<double> ThetaState::weights() const {
  std::vector<double> w(log_w.size());
  std::transform(log_w.begin(), log_w.end(), w.begin(), [](double x) { return std::exp(x); });
  return w;
}

double log_sum_exp(std::span<const double> x) {
  double m = kNegInf;
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

ThetaState theta_point(const FilterOutput& sys, std::size_t alpha, double t0) {
  if (alpha >= sys.size()) throw InputError("filtered state index out of range");
  ThetaState th;
  th.log_w.assign(sys.size(), kNegInf);
  th.log_w[alpha] = 0.0;
  th.last_event = t0;
  return th;
}

ThetaState theta_from_weights(const FilterOutput& sys, const std::vector<double>& w, double t0) {
  if (w.size() != sys.size()) throw InputError("weight vector does not match the filtered state count");
  ThetaState th;
  th.log_w.resize(w.size());
  for (std::size_t a = 0; a < w.size(); ++a) {
    if (!(w[a] >= 0.0)) throw InputError("weights must be nonnegative");
    th.log_w[a] = w[a] > 0.0 ? std::log(w[a]) : kNegInf;
  }
  normalize(th.log_w, -1, t0);
  th.last_event = t0;
  return th;
}

ThetaState theta_maxent(const FilterOutput& sys, std::size_t mark, double t0) {
  check_mark(sys, mark);
  std::vector<double> w(sys.size(), 0.0);
  for (auto a : sys.members(mark)) w[a] = 1.0;
  return theta_from_weights(sys, w, t0);
}

ThetaState theta_first_event(const FilterOutput& sys, const std::vector<ExpPoly>& start_row, std::size_t mark,
                             double t0) {
  check_mark(sys, mark);
  if (start_row.size() != sys.size()) throw InputError("start row does not match the filtered state count");
  ThetaState th;
  th.log_w.assign(sys.size(), kNegInf);
  for (auto a : sys.members(mark)) th.log_w[a] = start_row[a].log_value(t0);
  normalize(th.log_w, static_cast<long>(mark), t0);
  th.last_event = t0;
  th.count = 1;
  return th;
}

double log_event_density(const FilterOutput& sys, const ThetaState& theta, std::size_t mark, double waiting) {
  check_mark(sys, mark);
  std::vector<double> terms;
  for (std::size_t a = 0; a < sys.size(); ++a) {
    if (!std::isfinite(theta.log_w[a])) continue;
    terms.push_back(theta.log_w[a] + sys.grouped(a, mark).log_value(waiting));
  }
  return log_sum_exp(terms);
}

double log_survival(const FilterOutput& sys, const ThetaState& theta, double v) {
  std::vector<double> terms;
  for (std::size_t a = 0; a < sys.size(); ++a) {
    if (!std::isfinite(theta.log_w[a])) continue;
    terms.push_back(theta.log_w[a] + sys.survival(a).log_value(v));
  }
  return log_sum_exp(terms);
}

ThetaState theta_update(const FilterOutput& sys, const ThetaState& theta, std::size_t mark, double waiting) {
  check_mark(sys, mark);
  if (!(waiting > 0.0)) throw InputError("waiting time must be positive");
  ThetaState out;
  out.log_w.assign(sys.size(), kNegInf);
  std::vector<double> terms;
  for (auto b : sys.members(mark)) {
    terms.clear();
    for (std::size_t a = 0; a < sys.size(); ++a)
      if (std::isfinite(theta.log_w[a])) terms.push_back(theta.log_w[a] + sys.filtered().q(a, b).log_value(waiting));
    out.log_w[b] = log_sum_exp(terms);
  }
  normalize(out.log_w, static_cast<long>(mark), waiting);
  out.count = theta.count + 1;
  out.last_event = theta.last_event + waiting;
  return out;
}

HazardEval hazard_recurrent(const FilterOutput& sys, const ThetaState& theta, std::span<const std::size_t> marks,
                            double v) {
  if (!(v >= 0.0)) throw InputError("backward recurrence time must be nonnegative");
  std::vector<double> num;
  for (std::size_t a = 0; a < sys.size(); ++a) {
    if (!std::isfinite(theta.log_w[a])) continue;
    for (auto z : marks) {
      check_mark(sys, z);
      num.push_back(theta.log_w[a] + sys.grouped(a, z).log_value(v));
    }
  }
  return make_hazard(log_sum_exp(num), log_survival(sys, theta, v));
}

HazardEval hazard_recurrent(const FilterOutput& sys, const ThetaState& theta, std::size_t mark, double v) {
  return hazard_recurrent(sys, theta, std::span<const std::size_t>(&mark, 1), v);
}

HazardEval hazard_transient(const std::vector<ExpPoly>& row, std::span<const std::size_t> marks, double t) {
  if (!(t >= 0.0)) throw InputError("time must be nonnegative");
  std::vector<double> num;
  for (auto z : marks) {
    if (z >= row.size()) throw InputError("mark index out of range");
    num.push_back(row[z].log_value(t));
  }
  double mass = 0.0;
  for (const auto& f : row)
    if (!f.is_zero()) mass += f.mass();
  std::vector<double> den{std::log1p(-std::min(mass, 1.0))};
  for (const auto& f : row)
    if (!f.is_zero()) den.push_back(f.tail().log_value(t));
  if (!std::isfinite(log_sum_exp(den))) throw NumericError("transient survival vanished");
  return make_hazard(log_sum_exp(num), log_sum_exp(den));
}

HazardEval hazard_transient(const std::vector<ExpPoly>& row, std::size_t mark, double t) {
  return hazard_transient(row, std::span<const std::size_t>(&mark, 1), t);
}

double path_log_density(const FilterOutput& sys, const ThetaState& theta0, const std::vector<MarkedEvent>& events,
                        double t) {
  ThetaState th = theta0;
  double acc = 0.0;
  for (const auto& e : events) {
    const double w = e.time - th.last_event;
    if (!(w > 0.0)) throw InputError("event times must be strictly increasing");
    acc += log_event_density(sys, th, e.mark, w);
    if (!std::isfinite(acc)) return acc;
    th = theta_update(sys, th, e.mark, w);
  }
  if (t < th.last_event) throw InputError("horizon precedes the last event");
  return acc + log_survival(sys, th, t - th.last_event);
}

double FilterTracker::log_hazard(std::span<const std::size_t> marks, double t) const {
  return hazard_recurrent(*sys_, theta_, marks, t - theta_.last_event).log_value;
}

double FilterTracker::log_likelihood_at(double t) const {
  return loglik_ + log_survival(*sys_, theta_, t - theta_.last_event);
}

void FilterTracker::observe(std::size_t mark, double t) {
  const double w = t - theta_.last_event;
  loglik_ += log_event_density(*sys_, theta_, mark, w);
  theta_ = theta_update(*sys_, theta_, mark, w);
}

}  // namespace mrpchan
