#include <doctest.h>

#include <random>

#include "mrpchan/error.hpp"
#include "mrpchan/limits.hpp"
#include "mrpchan/models.hpp"
#include "mrpchan/simulate.hpp"

using namespace mrpchan;

TEST_CASE("stationary summaries") {
  SUBCASE("single exponential state") {
    const StationarySummary st = stationary(SemiMarkovKernel({"J"}, {{ExpPoly::exponential(2.5)}}));
    CHECK(st.m[0] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(st.rate[0] == doctest::Approx(2.5).epsilon(1e-14));
  }
  SUBCASE("symmetric two-state chain") {
    const ExpPoly f = ExpPoly::erlang(2, 3.0);
    Eigen::MatrixXd P(2, 2);
    P << 0.5, 0.5, 0.5, 0.5;
    const StationarySummary st = stationary(smk_from_conditional({"a", "b"}, P, {{f, f}, {f, f}}));
    for (int z = 0; z < 2; ++z) CHECK(st.m[z] == doctest::Approx(2.0 * f.first_moment()).epsilon(1e-12));
  }
  SUBCASE("three-state class identity") {
    const Channel c = gene_channel(GeneModelParams{}, 10.0);
    const SemiMarkovKernel k = build_marginal(c.kernel, c.joint).marginal_kernel();
    const StationarySummary st = stationary(k);
    const std::size_t J = k.index("J"), ON = k.index("ON"), OFF = k.index("OFF");
    const double pOnJ = k.P()(ON, J), pJOff = k.P()(J, OFF);
    const double denom = pOnJ * k.mean_sojourn(J) + pJOff * (k.mean_sojourn(ON) + k.mean_sojourn(OFF));
    CHECK(st.rate[J] == doctest::Approx(pOnJ / denom).epsilon(1e-10));
    CHECK(st.rate[ON] == doctest::Approx(pJOff / denom).epsilon(1e-10));
    CHECK(st.rate[OFF] == doctest::Approx(pJOff / denom).epsilon(1e-10));
    for (std::size_t z = 0; z < 3; ++z) {
      double sum = 0.0;
      for (std::size_t y = 0; y < 3; ++y) sum += k.P()(y, z) / st.m[y];
      CHECK(std::abs(sum - 1.0 / st.m[z]) < 1e-10);
    }
  }
  SUBCASE("reducible chain") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
    r(0, 1) = 1.0;
    CHECK_THROWS_AS(stationary(smk_from_generator({{"a", "b"}, r})), StructuralError);
  }
}

TEST_CASE("differential entropy") {
  CHECK(dentropy(ExpPoly::exponential(1.0)) == doctest::Approx(1.0).epsilon(1e-9));
  for (double k : {0.3, 2.0, 7.5}) CHECK(dentropy(ExpPoly::exponential(k)) == doctest::Approx(1.0 - std::log(k)).epsilon(1e-9));

  // Sampling check on the case-study inter-arrival density.
  const ExpPoly f = gene_f_tau(GeneModelParams{}, 10.0);
  const double mean = f.first_moment();
  std::mt19937_64 rng(2024);
  const std::size_t n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -f.log_value(MrpSampler::quantile(f, mean, uniform01(rng)));
    s += x;
    s2 += x * x;
  }
  const double m = s / n, se = std::sqrt((s2 / n - m * m) / n);
  CHECK(std::abs(dentropy(f) - m) < 3.0 * se);
}

TEST_CASE("probability integral transform") {
  for (const ExpPoly& f : {ExpPoly::exponential(0.7), ExpPoly::erlang(3, 2.0), gene_f_tau(GeneModelParams{}, 1.0)})
    CHECK(std::abs(expected_log_survival(f, f.tail()) + 1.0) < 1e-6);
}

TEST_CASE("renewal limit terms") {
  for (double k : {1.0, 0.4, 3.0}) {
    const SemiMarkovKernel r({"J"}, {{ExpPoly::exponential(k)}});
    const std::vector<std::size_t> targets = {0};
    CHECK(mir_mrp(r, targets).value == doctest::Approx(k * std::log(k)).epsilon(1e-9));
  }
  const ExpPoly f = ExpPoly::erlang(2, 1.3);
  const SemiMarkovKernel r({"J"}, {{f}});
  const std::vector<std::size_t> targets = {0};
  CHECK(mir_mrp(r, targets).value == doctest::Approx((1.0 - dentropy(f)) / f.first_moment()).epsilon(1e-9));
  CHECK(renewal_limit_term(f) == doctest::Approx((1.0 - dentropy(f)) / f.first_moment()).epsilon(1e-12));
}

TEST_CASE("channel MIR") {
  CHECK(std::abs(mir_channel(prepare_channel(poisson_channel(2.0))).mir) < 1e-12);

  const GeneModelParams p;
  const Channel c = gene_channel(p, 10.0);
  const ChannelMir m = mir_channel(prepare_channel(c));
  CHECK(m.mir > 0.0);
  const SemiMarkovKernel joint = build_marginal(c.kernel, c.joint).marginal_kernel();
  const ThreeStateMir t = three_state_mir(joint, gene_f_tau(p, 10.0));
  CHECK(std::abs(t.formula_a - t.formula_b) < 1e-9);
  CHECK(std::abs(t.formula_a - m.mir) < 1e-9);
}

TEST_CASE("three-state class that almost never switches off") {
  // P_{J,J} -> 1: the output becomes a renewal process with the J holding time and the MIR vanishes.
  const GeneModelParams p;
  const ExpPoly tau = gene_f_tau(p, 0.0);
  const double eps = 1e-12;
  Eigen::MatrixXd P(3, 3);
  P << 1.0 - eps, 0.0, eps, 1.0 - eps, 0.0, eps, 0.0, 1.0, 0.0;
  const ExpPoly e = ExpPoly::exponential(0.1);
  const auto joint = smk_from_conditional({"J", "ON", "OFF"}, P, {{tau, e, e}, {tau, e, e}, {e, e, e}});
  const ThreeStateMir t = three_state_mir(joint, tau);
  CHECK(std::abs(t.formula_a) < 1e-9);
  CHECK(std::abs(t.formula_b) < 1e-9);
}

TEST_CASE("direct Riemann integrability report") {
  CHECK(dri_checklist(ExpPoly::exponential(2.0)).advisory_pass);
  CHECK(dri_checklist(ExpPoly({{1.0, 1, 1.0}})).advisory_pass);
  CHECK_FALSE(dri_checklist(ExpPoly::constant(1.0)).advisory_pass);
}
