#include "mrpchan/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "mrpchan/error.hpp"

namespace mrpchan {

namespace {

/// Adaptive 15-point Gauss-Kronrod on [0, 40 / slowest decay], panels of 10 / fastest rate.
template <class F>
double integrate_density(F f, const ExpPoly& d) {
  const double slow = d.slowest_decay();
  if (!(slow > 0.0)) throw CapabilityError("density does not decay");
  const double t_cut = 40.0 / slow;
  const double len = 10.0 / std::max(d.fastest_rate(), slow);
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_cut / len)));
  const double w = t_cut / static_cast<double>(n);
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double err = 0.0;
    const double lo = w * static_cast<double>(i);
    acc += GK::integrate(f, lo, lo + w, 20, 1e-12, &err);
    if (!std::isfinite(acc)) throw ConvergenceError("quadrature produced a non-finite value");
  }
  return acc;
}

void reachable(const Eigen::MatrixXd& p, std::size_t from, bool forward, std::vector<bool>& seen) {
  std::vector<std::size_t> stack{from};
  seen.assign(static_cast<std::size_t>(p.rows()), false);
  seen[from] = true;
  while (!stack.empty()) {
    const std::size_t y = stack.back();
    stack.pop_back();
    for (Eigen::Index z = 0; z < p.rows(); ++z) {
      const double e = forward ? p(static_cast<Eigen::Index>(y), z) : p(z, static_cast<Eigen::Index>(y));
      if (e > 0.0 && !seen[static_cast<std::size_t>(z)]) {
        seen[static_cast<std::size_t>(z)] = true;
        stack.push_back(static_cast<std::size_t>(z));
      }
    }
  }
}

}  // namespace

StationarySummary stationary(const SemiMarkovKernel& k) {
  const std::size_t n = k.size();
  if (n == 0) throw InputError("empty kernel");
  for (std::size_t y = 0; y < n; ++y)
    if (k.defect(y) > 0.0) throw StructuralError("state '" + k.label(y) + "' is partially absorbing; no recurrence");
  std::vector<bool> fwd, bwd;
  reachable(k.P(), 0, true, fwd);
  reachable(k.P(), 0, false, bwd);
  std::string missing;
  for (std::size_t y = 0; y < n; ++y)
    if (!fwd[y] || !bwd[y]) missing += (missing.empty() ? "" : ", ") + k.label(y);
  if (!missing.empty()) throw StructuralError("embedded chain is reducible; not in the class of '" + k.label(0) + "': " + missing);

  const Eigen::Index m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a = (k.P() - Eigen::MatrixXd::Identity(m, m)).transpose();
  a.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(m - 1) = 1.0;
  StationarySummary s;
  s.labels = k.states();
  s.alpha = a.fullPivLu().solve(rhs);
  double cycle = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    s.mu.push_back(k.mean_sojourn(y));
    cycle += s.alpha(static_cast<Eigen::Index>(y)) * s.mu.back();
  }
  for (std::size_t z = 0; z < n; ++z) {
    s.m.push_back(cycle / s.alpha(static_cast<Eigen::Index>(z)));
    s.rate.push_back(1.0 / s.m.back());
  }
  return s;
}

double dentropy(const ExpPoly& density) {
  if (density.is_single_exponential()) {
    const double k = density.terms()[0].rate.real();
    return 1.0 - std::log(k);
  }
  return -integrate_density(
      [&](double t) {
        const double lp = density.log_value(t);
        return std::isfinite(lp) ? std::exp(lp) * lp : 0.0;
      },
      density);
}

double expected_log_survival(const ExpPoly& density, const ExpPoly& survival) {
  return integrate_density(
      [&](double t) {
        const double lp = density.log_value(t);
        if (!std::isfinite(lp)) return 0.0;
        return std::exp(lp) * survival.log_value(t);
      },
      density);
}

HoldingTimeLaw holding_time_law(const SemiMarkovKernel& k, std::size_t y, std::span<const std::size_t> targets) {
  std::vector<ExpPoly> parts;
  for (auto z : targets) parts.push_back(k.q(y, z));
  const ExpPoly q = sum(parts);
  HoldingTimeLaw law;
  if (q.is_zero()) return law;
  law.p = q.mass();
  law.density = q * (1.0 / law.p);
  law.entropy = dentropy(law.density);
  law.e_log_s = expected_log_survival(law.density, k.survival(y));
  return law;
}

MirResult mir_mrp(const SemiMarkovKernel& k, std::span<const std::size_t> targets) {
  const StationarySummary st = stationary(k);
  MirResult r;
  for (std::size_t y = 0; y < k.size(); ++y) {
    MirTerm t;
    t.from = k.label(y);
    t.inv_m = st.rate[y];
    t.law = holding_time_law(k, y, targets);
    if (t.law.p > 0.0) t.value = t.inv_m * t.law.p * (std::log(t.law.p) - t.law.entropy - t.law.e_log_s);
    r.value += t.value;
    r.terms.push_back(std::move(t));
  }
  return r;
}

double renewal_limit_term(const ExpPoly& f) { return (1.0 - dentropy(f)) / f.first_moment(); }

ChannelMir mir_channel(const ChannelSystems& c) {
  if (!c.joint.sys.injective() || !c.output.sys.injective())
    throw CapabilityError("MIR needs Markov renewal marginals; use Monte Carlo for this channel");
  ChannelMir r;
  r.joint = mir_mrp(c.joint.sys.marginal_kernel(), c.joint.targets);
  r.output = mir_mrp(c.output.sys.marginal_kernel(), c.output.targets);
  r.mir = r.joint.value - r.output.value;
  r.formula = c.output.sys.marks().size() == 1 ? "markov-renewal joint minus renewal output"
                                               : "markov-renewal joint minus markov-renewal output";
  return r;
}

ThreeStateMir three_state_mir(const SemiMarkovKernel& joint, const ExpPoly& f_tau) {
  const std::size_t J = joint.index("J"), ON = joint.index("ON"), OFF = joint.index("OFF");
  const StationarySummary st = stationary(joint);
  const auto law = [&](std::size_t y, std::size_t z) {
    const std::size_t t[1] = {z};
    return holding_time_law(joint, y, t);
  };
  const HoldingTimeLaw jj = law(J, J), joff = law(J, OFF), onj = law(ON, J), onoff = law(ON, OFF);
  const double h_tau = dentropy(f_tau);
  const double mean_tau = f_tau.first_moment();
  const auto xlogx = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };

  ThreeStateMir r;
  r.formula_a = st.rate[J] * (h_tau + xlogx(jj.p) - jj.p * jj.entropy + joff.p * joff.e_log_s) +
                st.rate[ON] * (xlogx(onj.p) - onj.p * onj.entropy + onoff.p * onoff.e_log_s + 1.0);
  r.formula_b = (std::log(jj.p) + h_tau - jj.entropy + onoff.p / jj.p * (1.0 + onoff.e_log_s)) / mean_tau;
  return r;
}

std::string DriReport::to_json() const {
  nlohmann::json j;
  j["schema"] = 1;
  j["advisory_pass"] = advisory_pass;
  for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"verdict", c.verdict}, {"detail", c.detail}});
  return j.dump(2);
}

DriReport dri_checklist(const ExpPoly& d) {
  DriReport r;
  auto add = [&](std::string name, bool ok, std::string detail, bool necessary) {
    r.checks.push_back({std::move(name), ok ? "pass" : "fail", std::move(detail)});
    if (necessary && !ok) r.advisory_pass = false;
  };
  const bool decays = d.all_rates_positive();
  add("integrable", decays, decays ? "every term decays" : "a term does not decay", true);
  double peak = 0.0;
  bool finite = true;
  const double t_end = decays ? 40.0 / d.slowest_decay() : 1e6;
  for (int i = 0; i <= 4096; ++i) {
    const double v = d(t_end * i / 4096.0);
    finite = finite && std::isfinite(v);
    peak = std::max(peak, std::abs(v));
  }
  add("bounded", finite, "max |f| on the grid = " + std::to_string(peak), true);
  const double end = std::abs(d(t_end));
  const bool vanishes = finite && end <= 1e-10 * std::max(peak, 1e-300);
  add("vanishes_at_infinity", vanishes, "|f(T_cut)| = " + std::to_string(end), true);

  bool real_nonneg = true, single_power0 = true;
  for (const auto& t : d.terms()) {
    if (t.rate.imag() != 0.0 || t.coeff.imag() != 0.0 || t.coeff.real() < 0.0) real_nonneg = false;
    if (t.power != 0) single_power0 = false;
  }
  if (d.is_single_exponential())
    r.checks.push_back({"sufficient_pattern", "pass", "exponential density: non-increasing and integrable"});
  else if (real_nonneg && !d.is_zero())
    r.checks.push_back({"sufficient_pattern", "pass",
                        single_power0 ? "nonnegative combination of exponential densities"
                                      : "nonnegative combination of Gamma-type terms"});
  else
    r.checks.push_back({"sufficient_pattern", "n/a", "no sufficient pattern recognised; advisory only"});
  return r;
}

}  // namespace mrpchan
