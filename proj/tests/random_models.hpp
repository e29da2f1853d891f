#pragma once

#include <random>

#include "mrpchan/filtering.hpp"
#include "mrpchan/intensity.hpp"

namespace mrpchan::testing {

/// Small random kernel with a random observation scheme and its marginal system.
struct RandomInstance {
  SemiMarkovKernel kernel;
  MarginalSpec spec;
  FilterOutput sys;
};

/// 2 to 4 states; generator or Erlang-2 conditional construction (rates from a fixed lattice); classes 0..2
/// with at least one observable exit per state; 1 or 2 marks.
RandomInstance random_instance(std::mt19937_64& rng);

/// Max difference between recursive filter weights and the directly multiplied
/// posterior over a random event sequence.
double bayes_consistency_error(const RandomInstance& inst, std::mt19937_64& rng);

/// |P(N_T = 0) + P(N_T = 1) + P(N_T >= 2) - 1| built from path densities.
double path_normalization_error(const RandomInstance& inst, std::mt19937_64& rng);

}  // namespace mrpchan::testing
