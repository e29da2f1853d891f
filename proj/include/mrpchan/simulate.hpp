#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mrpchan/kernel.hpp"
#include "mrpchan/renewal.hpp"

namespace mrpchan {

/// Trajectory of an MrP started by an event into `initial` at T_0 = 0.
struct Trajectory {
  std::size_t initial = 0;
  std::vector<double> times;
  std::vector<std::size_t> states;
  double horizon = 0.0;
  bool absorbed = false;  // ended early in a partially absorbing state
};

/// Independent stream for trajectory `index` (and sub-stream `part`) of a run with `seed`.
std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t part = 0);
/// Uniform in [0, 1) from 53 random bits.
double uniform01(std::mt19937_64& rng);

/// Draws successor and holding time with exactly two uniforms per event.
class MrpSampler {
 public:
  explicit MrpSampler(const SemiMarkovKernel& k);

  const SemiMarkovKernel& kernel() const noexcept { return *k_; }
  /// Next (state, waiting); state == size() signals absorption.
  std::pair<std::size_t, double> next(std::size_t y, std::mt19937_64& rng) const;
  /// Inverse of the conditional holding-time CDF of y -> z at probability u.
  double holding_quantile(std::size_t y, std::size_t z, double u) const;
  /// Inverse CDF of a probability density by bracketed root finding.
  static double quantile(const ExpPoly& density, double mean, double u);

 private:
  struct Law {
    double p = 0.0;
    double rate = 0.0;  // > 0 for a single exponential
    ExpPoly density;    // normalized
    double mean = 0.0;
  };
  const SemiMarkovKernel* k_;
  std::vector<std::vector<Law>> laws_;
};

Trajectory simulate_mrp(const SemiMarkovKernel& k, std::size_t z0, double T, std::uint64_t seed,
                        std::uint64_t index = 0);

struct MCEstimate {
  double value = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
  std::size_t discarded = 0;
  std::uint64_t seed = 0;
};

struct MCOptions {
  std::size_t n_traj = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Largest tolerated fraction of trajectories discarded for filter degeneracy.
  double discard_budget = 1e-3;
};

/// I(X_[0,T]; Y_[0,T]) as E[sum over Y arrivals of ln Lambda^XY - ln Lambda^Y],
/// both intensities at left limits; the full kernel drives the simulation.
MCEstimate mc_mi_dynamic(const Channel& channel, const ChannelSystems& systems, double T, const MCOptions& opt);

/// Static modulation: C ~ prior, then the output runs block C.
/// Start "arrival": an arrival into `initial` at t = 0. Start "stationary" (renewal blocks only):
/// the first waiting time has the equilibrium density S_c(t) / E_c[tau].
struct StaticModel {
  std::vector<SemiMarkovKernel> blocks;  // fully observed output kernels on a common state space
  std::string initial;
  bool stationary_start = false;
};
StaticModel gene_static_model(const GeneModelParams& p);

struct MCGrid {
  std::vector<std::vector<double>> priors;
  std::vector<double> T;
  std::vector<std::vector<double>> value;  // [prior][T]
  std::vector<std::vector<double>> se;
  std::size_t samples = 0;
  std::size_t discarded = 0;
  std::uint64_t seed = 0;
};

/// I(C; Y_[0,T]) for every prior and T on the grid. Each trajectory draws one uniform for C
/// and simulates every block once (common random numbers across priors), then accumulates
/// ln p(Y | C) - ln sum_c' p(c') p(Y | c') at each T.
MCGrid mc_mi_static(const StaticModel& model, const std::vector<std::vector<double>>& priors,
                    const std::vector<double>& T_grid, const MCOptions& opt);

/// Priors (1 - pi, pi) for a two-block model.
std::vector<std::vector<double>> binary_priors(const std::vector<double>& pis);

}  // namespace mrpchan
