#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrpchan/kernel.hpp"
#include "mrpchan/renewal.hpp"

namespace mrpchan {

/// Invariant measure of the embedded chain, mean sojourns and mean recurrence times.
struct StationarySummary {
  std::vector<std::string> labels;
  Eigen::VectorXd alpha;     // alpha P = alpha, sum alpha = 1
  std::vector<double> mu;    // mean sojourn per state
  std::vector<double> m;     // mean recurrence time per state
  std::vector<double> rate;  // 1/m
};

/// Throws StructuralError for a reducible or defective chain.
StationarySummary stationary(const SemiMarkovKernel& k);

/// -int p ln p for a probability density; closed form 1 - ln k for Exp(k).
double dentropy(const ExpPoly& density);
/// E[ln S(sigma)] for sigma with the given density.
double expected_log_survival(const ExpPoly& density, const ExpPoly& survival);

/// Conditional law of the holding time before a jump y -> targets.
struct HoldingTimeLaw {
  double p = 0.0;        // P_{y, targets}
  ExpPoly density;       // normalized
  double entropy = 0.0;  // h(sigma)
  double e_log_s = 0.0;  // E[ln S_y(sigma)]
};
HoldingTimeLaw holding_time_law(const SemiMarkovKernel& k, std::size_t y, std::span<const std::size_t> targets);

/// Limit of (1/T) int_0^T E[phi(lambda_t)] dt for the target marks taken together:
/// sum_y (1/m_y) P_yT (ln P_yT - h(sigma_yT) - E[ln S_y(sigma_yT)]).
struct MirTerm {
  std::string from;
  double inv_m = 0.0;
  HoldingTimeLaw law;
  double value = 0.0;
};
struct MirResult {
  std::vector<MirTerm> terms;
  double value = 0.0;
};
MirResult mir_mrp(const SemiMarkovKernel& k, std::span<const std::size_t> targets);

/// (1 - h(tau)) / E[tau] for a renewal process with inter-arrival density f.
double renewal_limit_term(const ExpPoly& f);

/// MIR of a channel whose joint and output marginals are both Markov renewal.
struct ChannelMir {
  double mir = 0.0;
  MirResult joint;
  MirResult output;
  std::string formula;
};
ChannelMir mir_channel(const ChannelSystems& c);

/// The two closed forms for the 3-state class {J, ON, OFF} with a renewal output of
/// inter-arrival density f_tau. Formula b assumes identical J and ON rows.
struct ThreeStateMir {
  double formula_a = 0.0;
  double formula_b = 0.0;
};
ThreeStateMir three_state_mir(const SemiMarkovKernel& joint, const ExpPoly& f_tau);

/// Advisory direct-Riemann-integrability report.
struct DriCheck {
  std::string name;
  std::string verdict;  // "pass" | "fail" | "n/a"
  std::string detail;
};
struct DriReport {
  std::vector<DriCheck> checks;
  bool advisory_pass = true;
  std::string to_json() const;
};
DriReport dri_checklist(const ExpPoly& d);

}  // namespace mrpchan
