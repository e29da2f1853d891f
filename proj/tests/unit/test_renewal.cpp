#include <doctest.h>

#include "mrpchan/error.hpp"
#include "mrpchan/limits.hpp"
#include "mrpchan/models.hpp"
#include "mrpchan/renewal.hpp"

using namespace mrpchan;

TEST_CASE("Poisson renewal density is constant") {
  const double k = 1.4;
  const Channel c = poisson_channel(k);
  const GridFunction r = volterra_solve(c.kernel, observed_start(c.kernel, {1.0}), 20.0, 0.01);
  for (std::size_t i = 0; i < r.points(); ++i) CHECK(std::abs(r.values[0][i] - k) < 1e-10);
}

TEST_CASE("Erlang-2 renewal density") {
  const double k = 0.9;
  const Channel c = erlang_channel(2, k);
  const RenewalStart start = observed_start(c.kernel, {1.0});
  const auto exact = [&](double t) { return 0.5 * k * (1.0 - std::exp(-2.0 * k * t)); };
  const GridFunction r = volterra_solve(c.kernel, start, 30.0, 0.01);
  for (std::size_t i = 0; i < r.points(); ++i) CHECK(std::abs(r.values[0][i] - exact(r.t(i))) < 1e-5);
  const auto lap = renewal_density_laplace(c.kernel, start);
  for (double t : {0.0, 0.3, 2.0, 30.0}) CHECK(std::abs(lap[0](t) - exact(t)) < 1e-12);
  const MeshConvergence mc = volterra_mesh_convergence(c.kernel, start, 10.0, 0.05);
  CHECK(mc.ratio > 3.5);
  CHECK(mc.ratio < 4.5);
}

TEST_CASE("grid and Laplace routes agree on the gene joint marginal") {
  const ChannelSystems cs = prepare_channel(gene_channel(GeneModelParams{}, 10.0));
  const SemiMarkovKernel& k = cs.joint.sys.filtered();
  const double h = default_step(k);
  const GridFunction r = volterra_solve(k, cs.joint.start, 300.0, h);
  const auto lap = renewal_density_laplace(k, cs.joint.start);
  double worst = 0.0;
  for (std::size_t z = 0; z < k.size(); ++z)
    for (std::size_t i = 0; i < r.points(); ++i) worst = std::max(worst, std::abs(r.values[z][i] - lap[z](r.t(i))));
  CHECK(worst < 1e-6);
}

TEST_CASE("renewal densities approach the recurrence rates") {
  const ChannelSystems cs = prepare_channel(gene_channel(GeneModelParams{}, 1.0));
  const SemiMarkovKernel& k = cs.joint.sys.filtered();
  const StationarySummary st = stationary(k);
  const auto lap = renewal_density_laplace(k, cs.joint.start);
  const double T = 50.0 * *std::max_element(st.m.begin(), st.m.end());
  for (std::size_t z = 0; z < k.size(); ++z) CHECK(lap[z](T) == doctest::Approx(st.rate[z]).epsilon(1e-6));
}

TEST_CASE("Markov renewal identity gives a sub-distribution") {
  // P(Z_t = z, V_t <= v) = int_{t-v}^t r_z(s) S_z(t - s) ds, monotone in v with total <= 1.
  const ChannelSystems cs = prepare_channel(gene_channel(GeneModelParams{}, 10.0));
  const SemiMarkovKernel& k = cs.joint.sys.filtered();
  const auto lap = renewal_density_laplace(k, cs.joint.start);
  const double t = 200.0;
  double total = 0.0;
  for (std::size_t z = 0; z < k.size(); ++z) {
    double prev = 0.0;
    const int n = 4000;
    const double h = t / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v0 = i * h, v1 = v0 + h;
      acc += 0.5 * h * (lap[z](t - v0) * k.survival(z)(v0) + lap[z](t - v1) * k.survival(z)(v1));
      CHECK(acc >= prev - 1e-15);
      prev = acc;
    }
    total += acc;
  }
  CHECK(total <= 1.0 + 1e-6);
}

TEST_CASE("phi curve for Poisson output") {
  for (double k : {1.0, 0.5, 3.0}) {
    const ChannelSystems cs = prepare_channel(poisson_channel(k));
    const PhiCurve c = phi_evolution(cs.output, 10.0, 0.01);
    for (double v : c.values) CHECK(std::abs(v - k * std::log(k)) < 1e-10);
    CHECK(std::abs(phi_value(cs.output, 3.3) - k * std::log(k)) < 1e-10);
  }
}

TEST_CASE("integration of phi curves") {
  const PhiCurve constant{0.1, std::vector<double>(101, 2.5)};
  CHECK(trapezoid(constant, 10.0) == doctest::Approx(25.0).epsilon(1e-14));
  const PhiCurve zero{0.1, std::vector<double>(101, 0.0)};
  CHECK(trapezoid(zero, 10.0) == 0.0);
  const TermIntegral ti = integrate_mi_term(PhiCurve{0.2, std::vector<double>(51, 2.5)}, constant, 10.0);
  CHECK(ti.value == doctest::Approx(25.0).epsilon(1e-14));
  CHECK(ti.error < 1e-12);
}

TEST_CASE("long-time average of the output phi curve is the renewal limit") {
  const GeneModelParams p;
  const Channel c = gene_channel(p, 10.0);
  const ChannelSystems cs = prepare_channel(c);
  const ExpPoly f = gene_f_tau(p, 10.0);
  const double T = 50.0 * f.first_moment();
  const double avg = mi_term_exact(cs.output, T) / T;
  CHECK(avg == doctest::Approx(renewal_limit_term(f)).epsilon(5e-3));
}

TEST_CASE("grid and exact MI terms agree") {
  const ChannelSystems cs = prepare_channel(gene_channel(GeneModelParams{}, 10.0));
  const double T = 100.0;
  const TermIntegral grid = mi_term_grid(cs.joint, T, default_step(cs.joint.sys.filtered()));
  const double exact = mi_term_exact(cs.joint, T);
  CHECK(grid.value == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("constant input carries no information") {
  const ChannelSystems cs = prepare_channel(poisson_channel(2.0));
  CHECK(std::abs(mi_exact(cs, 50.0).mi) < 1e-8);
  // Output of both input states maps to one mark: only Monte Carlo handles it.
  CHECK_THROWS_AS(mi_exact(prepare_channel(independent_channel(0.3, 0.5, 1.2)), 50.0), CapabilityError);
}

TEST_CASE("refinement mismatch is reported") {
  const Channel c = erlang_channel(2, 0.9);
  CHECK_THROWS_AS(volterra_solve_checked(c.kernel, observed_start(c.kernel, {1.0}), 10.0, 0.5, 1e-14), RefinementError);
}
