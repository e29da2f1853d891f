#include "mrpchan/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mrpchan/convolution.hpp"
#include "mrpchan/error.hpp"
#include "mrpchan/rational.hpp"

namespace mrpchan {

namespace {

std::size_t step_count(double T, double h) {
  if (!(h > 0.0)) throw InputError("grid step must be positive");
  if (!(T >= h)) throw InputError("horizon must be at least one grid step");
  return static_cast<std::size_t>(std::ceil(T / h - 1e-9));
}

/// First-event densities per state of k.
std::vector<ExpPoly> first_densities(const SemiMarkovKernel& k, const RenewalStart& start) {
  if (!start.observed) {
    if (start.first.size() != k.size()) throw InputError("first-event row does not match the kernel");
    return start.first;
  }
  if (start.eta.size() != k.size()) throw InputError("initial distribution does not match the kernel");
  std::vector<ExpPoly> f(k.size());
  for (std::size_t y = 0; y < k.size(); ++y) {
    if (start.eta[y] == 0.0) continue;
    for (std::size_t z = 0; z < k.size(); ++z) f[z] += k.q(y, z) * start.eta[y];
  }
  return f;
}

/// q ln(q / s) with the limit 0 where q vanishes.
double q_log_ratio(const ExpPoly& q, const ExpPoly& s, double v) {
  const double lq = q.log_value(v);
  if (!std::isfinite(lq)) return 0.0;
  return std::exp(lq) * (lq - s.log_value(v));
}

/// Pieces of the Prop-1 representation of E[phi(lambda_t)].
struct PhiParts {
  std::vector<ExpPoly> Q, S, r;
  bool observed = true;
  std::vector<double> eta;
  ExpPoly Q0, S0;
  double rate_scale = 1.0;

  double g(std::size_t y, double v) const { return Q[y].is_zero() ? 0.0 : q_log_ratio(Q[y], S[y], v); }
  double g0(double v) const {
    if (!observed) return Q0.is_zero() ? 0.0 : q_log_ratio(Q0, S0, v);
    double acc = 0.0;
    for (std::size_t y = 0; y < eta.size(); ++y)
      if (eta[y] != 0.0) acc += eta[y] * g(y, v);
    return acc;
  }
};

PhiParts phi_parts(const MarginalSystem& m) {
  if (!m.sys.injective()) throw CapabilityError("the exact route needs an injective coarse-graining; use Monte Carlo");
  const SemiMarkovKernel k = m.sys.marginal_kernel();
  PhiParts p;
  p.observed = m.start.observed;
  p.eta = m.start.eta;
  double fastest = 0.0;
  for (std::size_t y = 0; y < k.size(); ++y) {
    std::vector<ExpPoly> parts;
    for (auto z : m.targets) parts.push_back(k.q(y, z));
    p.Q.push_back(sum(parts));
    p.S.push_back(k.survival(y));
    fastest = std::max(fastest, p.Q.back().fastest_rate());
  }
  if (!p.observed) {
    std::vector<ExpPoly> parts;
    for (auto z : m.targets) parts.push_back(m.start.first[z]);
    p.Q0 = sum(parts);
    const ExpPoly all = sum(m.start.first);
    p.S0 = all.tail() + ExpPoly::constant(1.0 - all.mass());
    fastest = std::max(fastest, all.fastest_rate());
  }
  p.r = renewal_density_laplace(k, m.start);
  for (const auto& r : p.r) fastest = std::max(fastest, r.fastest_rate());
  p.rate_scale = fastest > 0.0 ? fastest : 1.0;
  return p;
}

/// Adaptive Gauss-Kronrod over panels no longer than 10 / rate_scale.
template <class F>
double integrate_panels(F f, double a, double b, double rate_scale) {
  if (!(b > a)) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double len = 10.0 / rate_scale;
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / len)));
  const double w = (b - a) / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = a + w * static_cast<double>(i);
    acc += GK::integrate(f, lo, i + 1 == n ? b : lo + w, 15, 1e-13);
  }
  return acc;
}

}  // namespace

double GridFunction::at(std::size_t state, double t) const {
  const auto& v = values.at(state);
  const double x = t / h;
  if (x < -1e-9 || x > static_cast<double>(v.size() - 1) + 1e-9) throw InputError("time outside the grid");
  const std::size_t i = std::min(v.size() - 2, static_cast<std::size_t>(std::max(0.0, std::floor(x))));
  const double f = x - static_cast<double>(i);
  return (1.0 - f) * v[i] + f * v[i + 1];
}

RenewalStart observed_start(const SemiMarkovKernel& k, std::vector<double> eta) {
  if (eta.size() != k.size()) throw InputError("initial distribution does not match the kernel");
  double total = 0.0;
  for (double e : eta) {
    if (!(e >= 0.0)) throw InputError("initial distribution must be nonnegative");
    total += e;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("initial distribution must sum to one");
  RenewalStart s;
  s.observed = true;
  s.eta = std::move(eta);
  return s;
}

RenewalStart transient_start(std::vector<ExpPoly> first) {
  RenewalStart s;
  s.observed = false;
  s.first = std::move(first);
  return s;
}

GridFunction volterra_solve(const SemiMarkovKernel& k, const RenewalStart& start, double T, double h) {
  const std::size_t n = k.size();
  const std::size_t steps = step_count(T, h);
  const std::vector<ExpPoly> first = first_densities(k, start);
  GridFunction out;
  out.h = h;
  out.labels = k.states();
  out.values.assign(n, std::vector<double>(steps + 1, 0.0));
  for (std::size_t z = 0; z < n; ++z) out.values[z][0] = first[z](0.0);

  struct Entry {
    std::size_t y, z;
    ExpKernelConvolution conv;
  };
  std::vector<Entry> entries;
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t z = 0; z < n; ++z)
      if (!k.q(y, z).is_zero()) entries.push_back({y, z, ExpKernelConvolution(k.q(y, z), h)});

  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t1 = static_cast<double>(i + 1) * h;
    for (std::size_t z = 0; z < n; ++z) b(static_cast<Eigen::Index>(z)) = first[z](t1);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (auto& e : entries) {
      e.conv.begin_linear(out.values[e.y][i]);
      b(static_cast<Eigen::Index>(e.z)) += e.conv.pending();
      w(static_cast<Eigen::Index>(e.z), static_cast<Eigen::Index>(e.y)) += e.conv.weight();
    }
    if (i == 0) lu.compute(Eigen::MatrixXd::Identity(w.rows(), w.cols()) - w);
    const Eigen::VectorXd r = lu.solve(b);
    for (std::size_t z = 0; z < n; ++z) out.values[z][i + 1] = r(static_cast<Eigen::Index>(z));
    for (auto& e : entries) e.conv.commit_linear(out.values[e.y][i + 1]);
  }
  return out;
}

namespace {

/// Max-norm difference on the points of the coarse grid, relative to the coarse max.
std::pair<double, double> grid_difference(const GridFunction& coarse, const GridFunction& fine) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t z = 0; z < coarse.values.size(); ++z)
    for (std::size_t i = 0; i < coarse.values[z].size(); ++i) {
      const double a = coarse.values[z][i];
      const double b = fine.values[z][2 * i];
      diff = std::max(diff, std::abs(a - b));
      scale = std::max(scale, std::abs(a));
    }
  return {diff, scale};
}

}  // namespace

GridFunction volterra_solve_checked(const SemiMarkovKernel& k, const RenewalStart& start, double T, double h,
                                    double tol) {
  GridFunction coarse = volterra_solve(k, start, T, h);
  GridFunction fine = volterra_solve(k, start, T, h / 2.0);
  const auto [diff, scale] = grid_difference(coarse, fine);
  if (diff > tol * std::max(scale, 1e-300))
    throw RefinementError("renewal density not resolved: step " + std::to_string(h) + " and its half differ by " +
                          std::to_string(diff));
  return fine;
}

MeshConvergence volterra_mesh_convergence(const SemiMarkovKernel& k, const RenewalStart& start, double T, double h) {
  const GridFunction a = volterra_solve(k, start, T, h);
  const GridFunction b = volterra_solve(k, start, T, h / 2.0);
  const GridFunction c = volterra_solve(k, start, T, h / 4.0);
  MeshConvergence m;
  m.diff_coarse = grid_difference(a, b).first;
  GridFunction c_on_b = b;
  for (std::size_t z = 0; z < b.values.size(); ++z)
    for (std::size_t i = 0; i < b.values[z].size(); ++i) c_on_b.values[z][i] = c.values[z][2 * i];
  double d = 0.0;
  for (std::size_t z = 0; z < a.values.size(); ++z)
    for (std::size_t i = 0; i < a.values[z].size(); ++i)
      d = std::max(d, std::abs(b.values[z][2 * i] - c_on_b.values[z][2 * i]));
  m.diff_fine = d;
  m.ratio = d > 0.0 ? m.diff_coarse / d : std::numeric_limits<double>::infinity();
  return m;
}

std::vector<ExpPoly> renewal_density_laplace(const SemiMarkovKernel& k, const RenewalStart& start) {
  const std::size_t n = k.size();
  const std::vector<ExpPoly> first = first_densities(k, start);
  RationalMatrix q(n, std::vector<RationalLT>(n));
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t z = 0; z < n; ++z) q[y][z] = lt_of(k.q(y, z));
  const RationalMatrix inv = inverse_identity_minus(q);
  std::vector<ExpPoly> r(n);
  for (std::size_t z = 0; z < n; ++z) {
    RationalLT acc;
    for (std::size_t y = 0; y < n; ++y)
      if (!first[y].is_zero() && !inv[y][z].is_zero()) acc = acc + lt_of(first[y]) * inv[y][z];
    r[z] = invert_lt(acc, true);
  }
  return r;
}

MarginalSystem make_marginal_system(const SemiMarkovKernel& k, const MarginalSpec& spec,
                                    const std::vector<std::string>& targets, const std::string& initial) {
  MarginalSystem m;
  m.sys = build_marginal(k, spec);
  for (const auto& t : targets) m.targets.push_back(m.sys.mark_index(t));
  const std::size_t xi = k.index(initial);
  m.entered.assign(k.size(), std::vector<long>(k.size(), -1));
  for (std::size_t y = 0; y < k.size(); ++y)
    for (std::size_t z = 0; z < k.size(); ++z) {
      const int c = spec.classes(y, z);
      if (c <= 0 || k.q(y, z).is_zero()) continue;
      const auto& labels = m.sys.filtered().states();
      const auto it = std::find(labels.begin(), labels.end(), augmented_label(k.label(z), c));
      if (it == labels.end()) throw InputError("observable transition into an unreachable filtered state");
      m.entered[y][z] = static_cast<long>(it - labels.begin());
    }
  std::vector<double> eta(m.sys.marks().size(), 0.0);
  double copies = 0.0;
  const std::string prefix = initial + "/";
  m.theta0.assign(m.sys.size(), 0.0);
  for (std::size_t a = 0; a < m.sys.size(); ++a) {
    const std::string& label = m.sys.filtered().label(a);
    if (label.compare(0, prefix.size(), prefix) == 0) {
      eta[m.sys.g()[a]] += 1.0;
      m.theta0[a] = 1.0;
      copies += 1.0;
    }
  }
  if (copies > 0.0) {
    for (double& e : eta) e /= copies;
    m.start.observed = true;
    m.start.eta = std::move(eta);
    return m;
  }
  m.theta0.clear();
  m.start_densities = transient_densities(k, spec, m.sys, xi);
  std::vector<ExpPoly> first(m.sys.marks().size());
  for (std::size_t z = 0; z < first.size(); ++z) {
    std::vector<ExpPoly> parts;
    for (auto a : m.sys.members(z)) parts.push_back(m.start_densities[a]);
    first[z] = sum(parts);
  }
  m.start = transient_start(std::move(first));
  return m;
}

ChannelSystems prepare_channel(const Channel& c) {
  return {make_marginal_system(c.kernel, c.joint, c.joint_targets, c.initial),
          make_marginal_system(c.kernel, c.output, c.output_targets, c.initial)};
}

PhiCurve phi_evolution(const MarginalSystem& m, double T, double h) {
  const PhiParts p = phi_parts(m);
  const std::size_t steps = step_count(T, h);
  std::vector<ExpKernelConvolution> conv;
  for (const auto& r : p.r) conv.emplace_back(r, h);
  PhiCurve c;
  c.h = h;
  c.values.resize(steps + 1);
  c.values[0] = p.g0(0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    double v = p.g0(static_cast<double>(i + 1) * h);
    for (std::size_t y = 0; y < conv.size(); ++y) {
      if (p.Q[y].is_zero() || p.r[y].is_zero()) continue;
      conv[y].step_exact([&](double s) { return p.g(y, s); });
      v += conv[y].value();
    }
    c.values[i + 1] = v;
  }
  return c;
}

double phi_value(const MarginalSystem& m, double t) {
  const PhiParts p = phi_parts(m);
  double v = p.g0(t);
  for (std::size_t y = 0; y < p.Q.size(); ++y) {
    if (p.Q[y].is_zero() || p.r[y].is_zero()) continue;
    v += integrate_panels([&](double s) { return p.g(y, s) * p.r[y](t - s); }, 0.0, t, p.rate_scale);
  }
  return v;
}

double trapezoid(const PhiCurve& c, double T) {
  const std::size_t n = step_count(T, c.h);
  if (std::abs(static_cast<double>(n) * c.h - T) > 1e-9 * T) throw InputError("horizon is not a multiple of the step");
  if (n >= c.values.size()) throw InputError("curve shorter than the horizon");
  double acc = 0.5 * (c.values[0] + c.values[n]);
  for (std::size_t i = 1; i < n; ++i) acc += c.values[i];
  return acc * c.h;
}

TermIntegral integrate_mi_term(const PhiCurve& coarse, const PhiCurve& fine, double T) {
  TermIntegral r;
  r.coarse = trapezoid(coarse, T);
  r.fine = trapezoid(fine, T);
  r.value = r.fine + (r.fine - r.coarse) / 3.0;
  r.error = std::abs(r.fine - r.coarse) / 3.0;
  return r;
}

TermIntegral mi_term_grid(const MarginalSystem& m, double T, double h) {
  return integrate_mi_term(phi_evolution(m, T, h), phi_evolution(m, T, h / 2.0), T);
}

double mi_term_exact(const MarginalSystem& m, double T) {
  if (!(T >= 0.0)) throw InputError("horizon must be nonnegative");
  const PhiParts p = phi_parts(m);
  std::vector<ExpPoly> R;
  for (const auto& r : p.r) R.push_back(r.antiderivative());
  auto f = [&](double v) {
    double acc = p.g0(v);
    for (std::size_t y = 0; y < p.Q.size(); ++y)
      if (!p.Q[y].is_zero() && !R[y].is_zero()) acc += p.g(y, v) * R[y](T - v);
    return acc;
  };
  return integrate_panels(f, 0.0, T, p.rate_scale);
}

ExactMI mi_exact(const ChannelSystems& c, double T) {
  ExactMI r;
  r.joint_term = mi_term_exact(c.joint, T);
  r.output_term = mi_term_exact(c.output, T);
  r.mi = r.joint_term - r.output_term;
  return r;
}

double default_step(const SemiMarkovKernel& k) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < k.size(); ++y)
    if (std::isfinite(k.mean_sojourn(y)) && k.mean_sojourn(y) > 0.0) m = std::min(m, k.mean_sojourn(y));
  if (!std::isfinite(m)) throw InputError("kernel has no state with a finite mean sojourn");
  return m / 200.0;
}

}  // namespace mrpchan
