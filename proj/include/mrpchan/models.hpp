#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrpchan/filtering.hpp"
#include "mrpchan/kernel.hpp"

namespace mrpchan {

/// A channel described by one full kernel and two observation specs:
/// the joint input/output marginal and the output-only marginal.
struct Channel {
  std::string name;
  SemiMarkovKernel kernel;
  MarginalSpec joint;
  MarginalSpec output;
  /// Marks of each marginal whose events are output arrivals.
  std::vector<std::string> joint_targets;
  std::vector<std::string> output_targets;
  /// State at t = 0, entered by an output arrival.
  std::string initial;
};

/// Promoter with repressor binding, one intermediate step and mRNA births into J.
/// Rates in 1/s; k_off in 1/(nM s); concentrations in nM.
struct GeneModelParams {
  double k_on = 0.0023;
  double k_off = 0.0027;
  double k1 = 0.165;
  double k2 = 0.165;
  double kJ = 0.165;
  double R0 = 1.0;
  double R1 = 10.0;
};

/// States {J, P_on, P_off, I1}; joint classes 0 (into/out of I1), 1 (P_off->P_on),
/// 2 (into P_off), 3 (into J), coarse marks {J, ON, OFF}; output marks {J}.
Channel gene_channel(const GeneModelParams& p, double R);
/// Inter-arrival density of the output at concentration R, obtained by filtering.
ExpPoly gene_f_tau(const GeneModelParams& p, double R);
/// Repressor-concentration-modulated output: blocks "c0", "c1" with [R]_0, [R]_1.
/// prior = (1 - pi, pi) over (c0, c1).
ModulatedKernel gene_modulated(const GeneModelParams& p, double pi);

/// Leaky two-state promoter; Y is produced at rate kJ when X = 1 and kJ r when X = r.
struct LeakageModelParams {
  double k_on = 0.0023;
  double k_off_R = 0.027;
  double kJ = 0.165;
  double r = 0.2;
};

/// States {r, 1, J1, Jr}; J1 and Jr mirror 1 and r and carry the output arrivals.
/// The kernel itself is the joint (X,Y) representation.
SemiMarkovKernel leakage_kernel(const LeakageModelParams& p);
Channel leakage_channel(const LeakageModelParams& p, const std::string& initial = "1");
/// Independent check: E[phi(lambda^XY_t)] from the two-state input chain via the matrix exponential.
double leakage_phi_oracle(const LeakageModelParams& p, const std::string& initial, double t);
/// Stationary limit of the oracle.
double leakage_phi_oracle_limit(const LeakageModelParams& p);

/// Output Poisson(k), input constant: one state J with Exp(k) self-transitions.
Channel poisson_channel(double k);
/// Renewal output with Erlang(shape, k) inter-arrival times and constant input.
Channel erlang_channel(int shape, double k);
/// Input switching A <-> B with rates a, b; output Poisson(k) independent of the input.
Channel independent_channel(double a, double b, double k);

/// Built-in channel names accepted by channel_by_name.
std::vector<std::string> builtin_channels();
Channel channel_by_name(const std::string& name);

}  // namespace mrpchan
