#include "random_models.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mrpchan::testing {

namespace {

double uniform(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

// Equal rates are exact repeated poles; distinct ones stay well apart.
constexpr double kErlangRates[] = {0.5, 0.8, 1.3, 2.1, 3.4};

SemiMarkovKernel random_kernel(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t z = 0; z < n; ++z)
      if (z != y && uniform(rng, 0, 1) < 0.7) rates(y, z) = uniform(rng, 0.2, 2.0);
    if (rates.row(y).sum() == 0.0) rates(y, (y + 1) % n) = uniform(rng, 0.2, 2.0);
  }
  if (uniform(rng, 0, 1) < 0.6) return smk_from_generator({labels, rates});
  // Conditional construction with Erlang-2 holding times, self-loops allowed.
  Eigen::MatrixXd P = rates;
  for (std::size_t y = 0; y < n; ++y) {
    if (uniform(rng, 0, 1) < 0.3) P(y, y) = uniform(rng, 0.2, 1.0);
    P.row(y) /= P.row(y).sum();
  }
  DensityMatrix f(n, std::vector<ExpPoly>(n));
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t z = 0; z < n; ++z)
      if (P(y, z) > 0.0) f[y][z] = ExpPoly::erlang(2, kErlangRates[pick(rng, std::size(kErlangRates))]);
  return smk_from_conditional(labels, P, f);
}

}  // namespace

RandomInstance random_instance(std::mt19937_64& rng) {
  for (;;) {
    RandomInstance inst;
    const std::size_t n = 2 + pick(rng, 3);
    inst.kernel = random_kernel(rng, n);
    inst.spec.classes = TransitionClassMap(n, 0);
    for (std::size_t y = 0; y < n; ++y) {
      std::vector<std::size_t> out;
      for (std::size_t z = 0; z < n; ++z)
        if (!inst.kernel.q(y, z).is_zero()) {
          inst.spec.classes.set(y, z, static_cast<int>(pick(rng, 3)));
          out.push_back(z);
        }
      bool observable = false;
      for (auto z : out) observable = observable || inst.spec.classes(y, z) > 0;
      if (!observable) inst.spec.classes.set(y, out[pick(rng, out.size())], 1);
    }
    const AugmentedKernel aug = augment(inst.kernel, inst.spec.classes);
    std::vector<std::string> observed;
    for (std::size_t a = 0; a < aug.kernel.size(); ++a)
      if (aug.cls[a] > 0) observed.push_back(aug.kernel.label(a));
    const std::size_t marks = std::min<std::size_t>(observed.size(), 1 + pick(rng, 2));
    for (std::size_t a = 0; a < observed.size(); ++a)
      inst.spec.coarse[observed[a]] = "m" + std::to_string(a < marks ? a : pick(rng, marks));
    inst.sys = build_marginal(inst.kernel, inst.spec);
    if (inst.sys.size() > 0) return inst;
  }
}

double bayes_consistency_error(const RandomInstance& inst, std::mt19937_64& rng) {
  const FilterOutput& sys = inst.sys;
  const std::size_t n = sys.size();
  std::vector<double> w(n);
  for (auto& x : w) x = uniform(rng, 0.0, 1.0);
  ThetaState theta = theta_from_weights(sys, w, 0.0);
  double sum = 0.0;
  for (double x : w) sum += x;
  for (auto& x : w) x /= sum;

  double worst = 0.0;
  for (int step = 0; step < 8; ++step) {
    const double wait = uniform(rng, 0.05, 2.0);
    std::vector<std::size_t> possible;
    for (std::size_t z = 0; z < sys.marks().size(); ++z) {
      double mass = 0.0;
      for (std::size_t a = 0; a < n; ++a)
        for (auto b : sys.members(z)) mass += w[a] * sys.filtered().q(a, b)(wait);
      if (mass > 1e-200) possible.push_back(z);
    }
    if (possible.empty()) break;
    const std::size_t z = possible[pick(rng, possible.size())];
    std::vector<double> next(n, 0.0);
    double total = 0.0;
    for (auto b : sys.members(z)) {
      for (std::size_t a = 0; a < n; ++a) next[b] += w[a] * sys.filtered().q(a, b)(wait);
      total += next[b];
    }
    for (auto& x : next) x /= total;
    const double lik = log_event_density(sys, theta, z, wait);
    theta = theta_update(sys, theta, z, wait);
    const auto got = theta.weights();
    for (std::size_t a = 0; a < n; ++a) worst = std::max(worst, std::abs(got[a] - next[a]));
    worst = std::max(worst, std::abs(lik - std::log(total)) / std::max(1.0, std::abs(lik)));
    w = next;
  }
  return worst;
}

double path_normalization_error(const RandomInstance& inst, std::mt19937_64& rng) {
  using boost::math::quadrature::gauss_kronrod;
  const FilterOutput& sys = inst.sys;
  std::vector<double> w(sys.size());
  for (auto& x : w) x = uniform(rng, 0.0, 1.0);
  const ThetaState theta0 = theta_from_weights(sys, w, 0.0);
  const double T = uniform(rng, 0.5, 3.0);
  const std::size_t marks = sys.marks().size();

  const double none = std::exp(path_log_density(sys, theta0, {}, T));
  auto one = [&](double t) {
    double s = 0.0;
    for (std::size_t z = 0; z < marks; ++z) s += std::exp(path_log_density(sys, theta0, {{z, t}}, T));
    return s;
  };
  auto more = [&](double t) {
    double s = 0.0;
    for (std::size_t z = 0; z < marks; ++z) {
      const double l = log_event_density(sys, theta0, z, t);
      if (!std::isfinite(l)) continue;
      const ThetaState th = theta_update(sys, theta0, z, t);
      s += std::exp(l) * (1.0 - std::exp(log_survival(sys, th, T - t)));
    }
    return s;
  };
  const double p1 = gauss_kronrod<double, 61>::integrate(one, 0.0, T, 10, 1e-12);
  const double p2 = gauss_kronrod<double, 61>::integrate(more, 0.0, T, 10, 1e-12);
  return std::abs(none + p1 + p2 - 1.0);
}

}  // namespace mrpchan::testing
