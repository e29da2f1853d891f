#include <doctest.h>

#include <random>

#include "mrpchan/error.hpp"
#include "mrpchan/intensity.hpp"
#include "mrpchan/models.hpp"

using namespace mrpchan;

namespace {

FilterOutput gene_joint(double R = 10.0) {
  const Channel c = gene_channel(GeneModelParams{}, R);
  return build_marginal(c.kernel, c.joint);
}

/// qbar(z, W) as a dense matrix: columns outside g^-1(z) are zero.
Eigen::MatrixXd qbar(const FilterOutput& f, std::size_t z, double w) {
  const std::size_t n = f.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (auto b : f.members(z)) m(a, b) = f.filtered().q(a, b)(w);
  return m;
}

Eigen::VectorXd survival(const FilterOutput& f, double v) {
  Eigen::VectorXd s(f.size());
  for (std::size_t a = 0; a < f.size(); ++a) s[a] = f.survival(a)(v);
  return s;
}

}  // namespace

TEST_CASE("log-sum-exp") {
  const std::vector<double> x = {-1000.0, -1000.0};
  CHECK(log_sum_exp(x) == doctest::Approx(-1000.0 + std::log(2.0)));
  const std::vector<double> none = {-INFINITY, -INFINITY};
  CHECK(std::isinf(log_sum_exp(none)));
  CHECK(std::isinf(log_sum_exp(std::span<const double>{})));
}

TEST_CASE("Poisson output") {
  const double k = 2.3;
  const Channel c = poisson_channel(k);
  const FilterOutput f = build_marginal(c.kernel, c.output);
  const ThetaState th = theta_point(f, 0);
  for (double v : {0.0, 0.4, 5.0, 60.0}) CHECK(hazard_recurrent(f, th, 0, v).value == doctest::Approx(k).epsilon(1e-12));
  const std::vector<MarkedEvent> ev = {{0, 0.3}, {0, 1.1}, {0, 1.5}, {0, 4.0}};
  CHECK(path_log_density(f, th, ev, 6.0) == doctest::Approx(4.0 * std::log(k) - 6.0 * k).epsilon(1e-12));
  ThetaState t2 = theta_update(f, th, 0, 0.7);
  CHECK(t2.weights()[0] == doctest::Approx(1.0));
  CHECK(t2.count == 1);
}

TEST_CASE("renewal hazard is f / S") {
  const ExpPoly f = ExpPoly::erlang(3, 1.2);
  const SemiMarkovKernel k({"J"}, {{f}});
  const FilterOutput sys = coarse_grain(k, {{"J", "J"}});
  const ThetaState th = theta_point(sys, 0);
  for (double v : {0.01, 0.5, 2.0, 20.0}) {
    const double x = 1.2 * v;
    const double expect = f(v) / (std::exp(-x) * (1.0 + x + 0.5 * x * x));
    CHECK(hazard_recurrent(sys, th, 0, v).value == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("two-block posterior follows the product of block densities") {
  const GeneModelParams p;
  const double pi = 0.35;
  const ModulatedKernel mk = gene_modulated(p, pi);
  std::map<std::string, std::string> g;
  for (const auto& s : mk.kernel.states()) g[s] = "J";
  const FilterOutput f = coarse_grain(mk.kernel, g);
  ThetaState th = theta_from_weights(f, mk.prior);
  double l0 = std::log(mk.prior[0]), l1 = std::log(mk.prior[1]);
  const double waits[] = {12.0, 150.0, 3.5, 80.0, 410.0};
  for (double w : waits) {
    th = theta_update(f, th, 0, w);
    l0 += std::log(mk.kernel.q(0, 0)(w));
    l1 += std::log(mk.kernel.q(1, 1)(w));
  }
  const double post1 = 1.0 / (1.0 + std::exp(l0 - l1));
  CHECK(th.weights()[1] == doctest::Approx(post1).epsilon(1e-12));
}

TEST_CASE("one update matches the Bayes posterior on a two-state kernel") {
  const ExpPoly a = ExpPoly::exponential(1.0), b = ExpPoly::erlang(2, 2.0);
  Eigen::MatrixXd P(2, 2);
  P << 0.3, 0.7, 0.6, 0.4;
  const auto k = smk_from_conditional({"x", "y"}, P, {{a, b}, {b, a}});
  const FilterOutput f = coarse_grain(k, {{"x", "m"}, {"y", "m"}});
  const std::vector<double> w0 = {0.25, 0.75};
  const ThetaState th = theta_from_weights(f, w0);
  const double W = 0.8;
  const ThetaState th1 = theta_update(f, th, 0, W);
  // Posterior of the entered state from the joint density of the two-event path.
  double joint[2];
  for (int b2 = 0; b2 < 2; ++b2) joint[b2] = w0[0] * k.q(0, b2)(W) + w0[1] * k.q(1, b2)(W);
  CHECK(th1.weights()[0] == doctest::Approx(joint[0] / (joint[0] + joint[1])).epsilon(1e-13));
  CHECK(log_event_density(f, th, 0, W) == doctest::Approx(std::log(joint[0] + joint[1])).epsilon(1e-13));
}

TEST_CASE("path density against the direct product") {
  const FilterOutput f = gene_joint();
  const std::size_t J = f.mark_index("J");
  const ThetaState th0 = theta_point(f, f.members(J)[0]);
  const std::vector<MarkedEvent> ev = {{f.mark_index("OFF"), 20.0}, {f.mark_index("ON"), 400.0}};
  const double t = 430.0;
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(f.size());
  v[f.members(J)[0]] = 1.0;
  v = v * qbar(f, ev[0].mark, 20.0) * qbar(f, ev[1].mark, 380.0);
  const double direct = std::log(v.dot(survival(f, t - 400.0)));
  CHECK(path_log_density(f, th0, ev, t) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("impossible observation raises a degeneracy error") {
  const FilterOutput f = gene_joint();
  const ThetaState off = theta_point(f, f.members(f.mark_index("OFF"))[0]);
  CHECK_THROWS_AS(theta_update(f, off, f.mark_index("J"), 3.0), DegeneracyError);
  CHECK(std::isinf(log_event_density(f, off, f.mark_index("J"), 3.0)));
}

TEST_CASE("hazards on the gene model") {
  const GeneModelParams p;
  const Channel c = gene_channel(p, 10.0);
  SUBCASE("recurrent hazards sum to -d/dv ln S") {
    const FilterOutput f = build_marginal(c.kernel, c.joint);
    const std::size_t on = f.members(f.mark_index("ON"))[0];
    const ThetaState th = theta_point(f, on);
    std::vector<std::size_t> all(f.marks().size());
    for (std::size_t z = 0; z < all.size(); ++z) all[z] = z;
    for (double v : {0.5, 3.0, 20.0}) {
      const double e = 1e-5;
      const double fd = -(std::log(f.survival(on)(v + e)) - std::log(f.survival(on)(v - e))) / (2 * e);
      CHECK(hazard_recurrent(f, th, all, v).value == doctest::Approx(fd).epsilon(1e-7));
      double parts = 0.0;
      for (auto z : all) parts += hazard_recurrent(f, th, z, v).value;
      CHECK(parts == doctest::Approx(fd).epsilon(1e-7));
    }
  }
  SUBCASE("transient hazards") {
    const FilterOutput f = build_marginal(c.kernel, c.output);
    const auto off = transient_row(c.kernel, c.output, f, c.kernel.index("P_off"));
    CHECK(hazard_transient(off, 0, 0.0).value == doctest::Approx(0.0));
    const auto on = transient_row(c.kernel, c.output, f, c.kernel.index("P_on"));
    // Two-step path: the hazard starts linearly, Lambda(t) ~ k1 kJ t.
    const double t = 1e-4;
    CHECK(hazard_transient(on, 0, t).value == doctest::Approx(p.k1 * p.kJ * t).epsilon(1e-3));
  }
  SUBCASE("Exp first arrival") {
    const Channel pc = poisson_channel(0.9);
    const FilterOutput f = build_marginal(pc.kernel, pc.output);
    const auto row = transient_row(pc.kernel, pc.output, f, 0);
    CHECK(hazard_transient(row, 0, 2.0).value == doctest::Approx(0.9).epsilon(1e-12));
  }
}

TEST_CASE("log-domain filter stays normalized over long paths") {
  const ModulatedKernel mk = gene_modulated(GeneModelParams{}, 0.5);
  std::map<std::string, std::string> g;
  for (const auto& s : mk.kernel.states()) g[s] = "J";
  const FilterOutput m = coarse_grain(mk.kernel, g);
  ThetaState th = theta_from_weights(m, mk.prior);
  std::mt19937_64 rng(17);
  std::exponential_distribution<double> wait(1.0 / 150.0);
  for (int i = 0; i < 10000; ++i) th = theta_update(m, th, 0, wait(rng));
  double sum = 0.0;
  for (double w : th.weights()) {
    CHECK(std::isfinite(w));
    sum += w;
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
  CHECK(th.count == 10000);
}

TEST_CASE("tracker likelihood matches the path density") {
  const FilterOutput f = gene_joint(1.0);
  const std::size_t J = f.mark_index("J");
  const ThetaState th0 = theta_point(f, f.members(J)[0]);
  FilterTracker tr(f, th0);
  const std::vector<MarkedEvent> ev = {{J, 4.0}, {f.mark_index("OFF"), 9.0}, {f.mark_index("ON"), 700.0}};
  for (const auto& e : ev) tr.observe(e.mark, e.time);
  CHECK(tr.log_likelihood_at(720.0) == doctest::Approx(path_log_density(f, th0, ev, 720.0)).epsilon(1e-12));
}
