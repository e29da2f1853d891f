#include <doctest.h>

#include <random>

#include "mrpchan/error.hpp"
#include "mrpchan/kernel.hpp"
#include "oracles.hpp"

using namespace mrpchan;

namespace {

ExpPoly random_density(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> rate(0.3, 3.0);
  std::uniform_int_distribution<int> shape(1, 3);
  const double w = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
  return ExpPoly::erlang(shape(rng), rate(rng)) * w + ExpPoly::exponential(rate(rng)) * (1.0 - w);
}

}  // namespace

TEST_CASE("exp-poly basics") {
  const ExpPoly e = ExpPoly::exponential(2.0);
  CHECK(e(0.5) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(e.mass() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.first_moment() == doctest::Approx(0.5).epsilon(1e-15));
  const ExpPoly g = ExpPoly::erlang(3, 1.5);
  CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.tail()(2.0) == doctest::Approx(1.0 - g.cumulative(2.0)).epsilon(1e-14));
  CHECK(g.log_value(400.0) == doctest::Approx(std::log(1.5 * 1.5 * 1.5 / 2.0) + 2.0 * std::log(400.0) - 600.0));
  CHECK(g.derivative()(1.0) == doctest::Approx((g(1.0 + 1e-6) - g(1.0 - 1e-6)) / 2e-6).epsilon(1e-7));
}

TEST_CASE("equal rates merge into one term") {
  const ExpPoly a({{1.0, 0, 2.0}, {0.5, 0, 2.0 * (1.0 + 1e-12)}});
  CHECK(a.terms().size() == 1);
  const ExpPoly c = ExpPoly::exponential(1.0).convolve(ExpPoly::exponential(1.0));
  REQUIRE(c.terms().size() == 1);
  CHECK(c.terms()[0].power == 1);
  CHECK(c(2.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("convolution matches quadrature on random pairs") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const ExpPoly f = random_density(rng), g = random_density(rng);
    const ExpPoly fg = f.convolve(g);
    for (double t = 0.0; t <= 20.0; t += 0.5)
      CHECK(std::abs(fg(t) - oracle::convolve(f, g, t)) < 1e-8);
  }
}

TEST_CASE("generator construction") {
  SUBCASE("unit-rate flip-flop") {
    Eigen::MatrixXd r(2, 2);
    r << 0, 1, 1, 0;
    const auto k = smk_from_generator({{"a", "b"}, r});
    CHECK(k.q(0, 1)(0.7) == doctest::Approx(std::exp(-0.7)).epsilon(1e-15));
    CHECK(k.P()(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("survival is exactly exp(-u t)") {
    Eigen::MatrixXd r(3, 3);
    r << 0, 0.4, 1.1, 0.2, 0, 0.3, 2.0, 0.5, 0;
    const auto k = smk_from_generator({{"a", "b", "c"}, r});
    for (std::size_t y = 0; y < 3; ++y) {
      const auto& terms = k.survival(y).terms();
      REQUIRE(terms.size() == 1);
      CHECK(terms[0].power == 0);
      CHECK(terms[0].coeff.real() == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(terms[0].rate.real() == doctest::Approx(r.row(y).sum()).epsilon(1e-15));
    }
  }
  SUBCASE("absorbing row") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
    r(0, 1) = 1.0;
    const auto k = smk_from_generator({{"a", "b"}, r});
    CHECK(k.q(1, 0).is_zero());
    CHECK(k.defect(1) == doctest::Approx(1.0));
  }
  SUBCASE("negative rate") {
    Eigen::MatrixXd r(2, 2);
    r << 0, -1, 1, 0;
    CHECK_THROWS_AS(smk_from_generator({{"a", "b"}, r}), InputError);
  }
}

TEST_CASE("conditional construction") {
  Eigen::MatrixXd P(2, 2);
  P << 0.3, 0.7, 1.0, 0.0;
  const ExpPoly e = ExpPoly::exponential(1.0);
  const auto k = smk_from_conditional({"a", "b"}, P, {{e, e}, {e, e}});
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z) CHECK(std::abs(k.q(y, z).mass() - P(y, z)) < 1e-12);

  Eigen::MatrixXd Q(1, 1);
  Q << 0.9;
  const auto d = smk_from_conditional({"a"}, Q, {{e}});
  CHECK(d.defect(0) == doctest::Approx(0.1).epsilon(1e-12));

  CHECK_THROWS_AS(smk_from_conditional({"a"}, Q, {{e * 0.5}}), InputError);
}

TEST_CASE("competing clocks") {
  const double a = 0.7, b = 1.9;
  const DensityMatrix clocks = {{ExpPoly(), ExpPoly::exponential(a), ExpPoly::exponential(b)},
                                {ExpPoly::exponential(1.0), ExpPoly(), ExpPoly()},
                                {ExpPoly::exponential(1.0), ExpPoly(), ExpPoly()}};
  const auto k = smk_from_competing({"y", "1", "2"}, clocks);
  CHECK(k.P()(0, 1) == doctest::Approx(a / (a + b)).epsilon(1e-13));
  for (double t : {0.0, 0.3, 1.0, 4.0}) {
    // f_a(t) (1 - F_b(t)) with the survival integrated numerically.
    const double surv_b = 1.0 - oracle::integrate([&](double u) { return b * std::exp(-b * u); }, 0.0, t);
    CHECK(k.q(0, 1)(t) == doctest::Approx(a * std::exp(-a * t) * surv_b).epsilon(1e-12));
  }

  const auto sym = smk_from_competing({"y", "1", "2"}, {{ExpPoly(), ExpPoly::exponential(1.0), ExpPoly::exponential(1.0)},
                                                         clocks[1], clocks[2]});
  CHECK(sym.P()(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sym.P()(0, 2) == doctest::Approx(0.5).epsilon(1e-14));

  const auto single = smk_from_competing({"j"}, {{ExpPoly::exponential(2.5)}});
  CHECK(single.q(0, 0)(1.3) == doctest::Approx(2.5 * std::exp(-2.5 * 1.3)).epsilon(1e-15));
}

TEST_CASE("row mass is conserved for every construction") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd P(3, 3);
  P << 0.2, 0.5, 0.3, 0.0, 0.0, 0.6, 1.0, 0.0, 0.0;
  DensityMatrix f(3, std::vector<ExpPoly>(3));
  for (int y = 0; y < 3; ++y)
    for (int z = 0; z < 3; ++z)
      if (P(y, z) > 0) f[y][z] = random_density(rng);
  const auto k = smk_from_conditional({"a", "b", "c"}, P, f);
  for (std::size_t y = 0; y < 3; ++y) CHECK(std::abs(k.P().row(y).sum() + k.defect(y) - 1.0) < kMassTol);
}

TEST_CASE("kernel validation") {
  CHECK_THROWS_AS(SemiMarkovKernel({"a"}, {{ExpPoly::exponential(1.0) * 1.5}}), InputError);
  CHECK_THROWS_AS(SemiMarkovKernel({"a"}, {{ExpPoly({{3.0, 0, 1.0}, {-4.0, 0, 2.0}})}}), InputError);
  CHECK_THROWS_AS(SemiMarkovKernel({"a", "a"}, DensityMatrix(2, std::vector<ExpPoly>(2))), InputError);
  const SemiMarkovKernel k({"a"}, {{ExpPoly::exponential(2.0)}});
  CHECK_THROWS_AS(k.index("b"), InputError);
  CHECK(k.mean_sojourn(0) == doctest::Approx(0.5));
}
