#include <doctest.h>

#include <algorithm>
#include <set>

#include "mrpchan/error.hpp"
#include "mrpchan/filtering.hpp"
#include "mrpchan/models.hpp"
#include "oracles.hpp"

using namespace mrpchan;

namespace {

std::vector<std::size_t> observed(const AugmentedKernel& a) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < a.kernel.size(); ++i)
    if (a.cls[i] > 0) keep.push_back(i);
  return keep;
}

}  // namespace

TEST_CASE("augmentation of the gene model") {
  const Channel c = gene_channel(GeneModelParams{}, 10.0);
  const AugmentedKernel a = augment(c.kernel, c.joint.classes);
  const std::set<std::string> labels(a.kernel.states().begin(), a.kernel.states().end());
  CHECK(labels == std::set<std::string>{"J/3", "P_on/1", "P_off/2", "P_on/0", "I1/0"});
}

TEST_CASE("augmentation with a single class keeps the kernel") {
  Eigen::MatrixXd r(2, 2);
  r << 0, 1.3, 0.4, 0;
  const auto k = smk_from_generator({{"a", "b"}, r});
  const AugmentedKernel a = augment(k, TransitionClassMap(2, 1));
  REQUIRE(a.kernel.size() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(a.kernel.q(i, j)(0.9) == doctest::Approx(k.q(a.base[i], a.base[j])(0.9)).epsilon(1e-15));
}

TEST_CASE("self-transition with its own class is a distinct target") {
  const ExpPoly e = ExpPoly::exponential(1.0);
  Eigen::MatrixXd P(2, 2);
  P << 0.5, 0.5, 1.0, 0.0;
  const auto k = smk_from_conditional({"a", "b"}, P, {{e, e}, {e, e}});
  TransitionClassMap cls(2, 1);
  cls.set(0, 0, 2);
  const AugmentedKernel a = augment(k, cls);
  CHECK_NOTHROW(a.kernel.index("a/2"));
  CHECK_NOTHROW(a.kernel.index("a/1"));
  CHECK_NOTHROW(a.kernel.index("b/1"));
}

TEST_CASE("filtering onto every state is the identity") {
  const Channel c = gene_channel(GeneModelParams{}, 1.0);
  const FilteredKernel f = anderson_filter(c.kernel, {0, 1, 2, 3});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (double t : {0.0, 1.0, 10.0}) CHECK(std::abs(f.kernel.q(i, j)(t) - c.kernel.q(i, j)(t)) < 1e-15);
}

TEST_CASE("one hidden state without self-loops gives A + B*C") {
  // 0 -> 1 (hidden) -> 2 and 0 -> 2 directly; 2 -> 0.
  const ExpPoly f01 = ExpPoly::erlang(2, 1.5), f12 = ExpPoly::exponential(0.7), f02 = ExpPoly::exponential(2.0);
  Eigen::MatrixXd P(3, 3);
  P << 0, 0.4, 0.6, 0, 0, 1, 1, 0, 0;
  const auto k = smk_from_conditional({"x", "h", "y"}, P, {{ExpPoly(), f01, f02}, {ExpPoly(), ExpPoly(), f12},
                                                            {ExpPoly::exponential(1.0), ExpPoly(), ExpPoly()}});
  const FilteredKernel f = anderson_filter(k, {0, 2});
  CHECK(f.hidden == std::vector<std::size_t>{1});
  for (double t = 0.0; t <= 20.0; t += 0.5) {
    const double expect = 0.6 * f02(t) + 0.4 * oracle::convolve(f01, f12, t);
    CHECK(std::abs(f.kernel.q(0, 1)(t) - expect) < 1e-8);
  }
}

TEST_CASE("series and Laplace paths agree on the gene model") {
  const GeneModelParams p;
  for (double R : {p.R0, p.R1}) {
    const Channel c = gene_channel(p, R);
    const AugmentedKernel a = augment(c.kernel, c.joint.classes);
    const auto keep = observed(a);
    const FilteredKernel lap = anderson_filter(a.kernel, keep);
    const SeriesFilterResult ser = anderson_filter_series(a.kernel, keep, 60.0, 0.05);
    CHECK(ser.spectral_radius < 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < ser.values.size(); ++i)
      for (std::size_t x = 0; x < keep.size(); ++x)
        for (std::size_t y = 0; y < keep.size(); ++y)
          worst = std::max(worst, std::abs(ser.values[i](x, y) - lap.kernel.q(x, y)(i * ser.h)));
    CHECK(worst < 1e-7);
  }
}

TEST_CASE("filtering conserves row mass") {
  const Channel c = gene_channel(GeneModelParams{}, 10.0);
  const FilterOutput f = build_marginal(c.kernel, c.joint);
  for (std::size_t a = 0; a < f.size(); ++a) {
    double mass = 0.0;
    for (std::size_t b = 0; b < f.size(); ++b) mass += f.filtered().q(a, b).mass();
    CHECK(std::abs(mass - 1.0) < 1e-8);
  }
}

TEST_CASE("coarse-graining") {
  SUBCASE("gene joint marginal is injective on {J, ON, OFF}") {
    const Channel c = gene_channel(GeneModelParams{}, 10.0);
    const FilterOutput f = build_marginal(c.kernel, c.joint);
    CHECK(f.injective());
    const SemiMarkovKernel m = f.marginal_kernel();
    const std::set<std::string> labels(m.states().begin(), m.states().end());
    CHECK(labels == std::set<std::string>{"J", "ON", "OFF"});
  }
  SUBCASE("modulated output is not injective") {
    const ModulatedKernel mk = gene_modulated(GeneModelParams{}, 0.4);
    std::map<std::string, std::string> g;
    for (const auto& s : mk.kernel.states()) g[s] = "J";
    const FilterOutput f = coarse_grain(mk.kernel, g);
    CHECK_FALSE(f.injective());
    CHECK(f.marks().size() == 1);
    CHECK_THROWS(f.marginal_kernel());
  }
  SUBCASE("identity map leaves the kernel unchanged") {
    const Channel c = gene_channel(GeneModelParams{}, 1.0);
    std::map<std::string, std::string> g;
    for (const auto& s : c.kernel.states()) g[s] = s;
    const FilterOutput f = coarse_grain(c.kernel, g);
    CHECK(f.injective());
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(f.filtered().q(i, j)(2.0) == c.kernel.q(i, j)(2.0));
  }
  SUBCASE("unmapped state is an input error") {
    const Channel c = gene_channel(GeneModelParams{}, 1.0);
    CHECK_THROWS_AS(coarse_grain(c.kernel, {{"J", "J"}}), InputError);
  }
}

TEST_CASE("first-event densities") {
  SUBCASE("Poisson start") {
    const Channel c = poisson_channel(1.7);
    const FilterOutput f = build_marginal(c.kernel, c.output);
    const auto row = transient_row(c.kernel, c.output, f, 0);
    REQUIRE(row.size() == 1);
    for (double t : {0.0, 0.5, 3.0}) CHECK(row[0](t) == doctest::Approx(1.7 * std::exp(-1.7 * t)).epsilon(1e-13));
  }
  SUBCASE("gene model from P_on reaches J with probability one") {
    const GeneModelParams p;
    for (double R : {p.R0, p.R1}) {
      const Channel c = gene_channel(p, R);
      const FilterOutput f = build_marginal(c.kernel, c.output);
      const auto row = transient_row(c.kernel, c.output, f, c.kernel.index("P_on"));
      double mass = 0.0;
      for (const auto& d : row) mass += d.mass();
      CHECK(std::abs(mass - 1.0) < 1e-8);
      const double quad = oracle::integrate([&](double t) { return row[0](t); }, 0.0, 2e5, 1e-12);
      CHECK(std::abs(quad - 1.0) < 1e-8);
    }
  }
  SUBCASE("renewal start equals the filtered sojourn") {
    const Channel c = erlang_channel(2, 0.9);
    const FilterOutput f = build_marginal(c.kernel, c.output);
    const auto row = transient_row(c.kernel, c.output, f, 0);
    for (double t : {0.1, 1.0, 4.0}) CHECK(row[0](t) == doctest::Approx(f.filtered().sojourn(0)(t)).epsilon(1e-12));
  }
}

TEST_CASE("modulated kernel") {
  const SemiMarkovKernel k({"J"}, {{ExpPoly::exponential(2.0)}});
  const ModulatedKernel one = modulated_kernel({"c"}, {k}, {1.0});
  REQUIRE(one.kernel.size() == 1);
  CHECK(one.kernel.q(0, 0)(0.3) == k.q(0, 0)(0.3));

  const ModulatedKernel two = modulated_kernel({"a", "b"}, {k, k}, {0.3, 0.7});
  REQUIRE(two.kernel.size() == 2);
  CHECK(two.kernel.q(0, 1).is_zero());
  CHECK(two.kernel.q(1, 1)(0.3) == k.q(0, 0)(0.3));
  CHECK_THROWS_AS(modulated_kernel({"a", "b"}, {k, k}, {0.3, 0.3}), InputError);
}
