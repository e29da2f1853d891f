#include "mrpchan/models.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "mrpchan/error.hpp"

namespace mrpchan {

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0)) throw InputError(std::string("parameter ") + name + " must be positive");
}

/// Every transition observable, class = 1 + index of the target; marks are the state labels.
MarginalSpec fully_observed(const SemiMarkovKernel& k) {
  MarginalSpec s{TransitionClassMap(k.size(), 0), {}};
  for (std::size_t y = 0; y < k.size(); ++y)
    for (std::size_t z = 0; z < k.size(); ++z) s.classes.set(y, z, static_cast<int>(z) + 1);
  for (std::size_t z = 0; z < k.size(); ++z) s.coarse[augmented_label(k.label(z), static_cast<int>(z) + 1)] = k.label(z);
  return s;
}

/// Only transitions into the target states are observable (class 1); all map to mark "J".
MarginalSpec output_only(const SemiMarkovKernel& k, const std::vector<std::string>& targets) {
  MarginalSpec s{TransitionClassMap(k.size(), 0), {}};
  for (const auto& t : targets) {
    const std::size_t z = k.index(t);
    for (std::size_t y = 0; y < k.size(); ++y) s.classes.set(y, z, 1);
    s.coarse[augmented_label(t, 1)] = "J";
  }
  return s;
}

}  // namespace

Channel gene_channel(const GeneModelParams& p, double R) {
  check_positive(p.k_on, "k_on");
  check_positive(p.k_off, "k_off");
  check_positive(p.k1, "k1");
  check_positive(p.k2, "k2");
  check_positive(p.kJ, "kJ");
  if (!(R >= 0.0)) throw InputError("repressor concentration must be nonnegative");
  enum { J, Pon, Poff, I1 };
  GeneratorSpec g{{"J", "P_on", "P_off", "I1"}, Eigen::MatrixXd::Zero(4, 4)};
  const double koffR = p.k_off * R;
  for (int y : {J, Pon}) {
    g.rates(y, Poff) = koffR;
    g.rates(y, I1) = p.k1;
  }
  g.rates(Poff, Pon) = p.k_on;
  g.rates(I1, J) = p.kJ;
  g.rates(I1, Pon) = p.k2;

  Channel c;
  c.name = "gene";
  c.kernel = smk_from_generator(g);
  c.joint.classes = TransitionClassMap(4, 0);
  for (std::size_t y = 0; y < 4; ++y) {
    c.joint.classes.set(y, Poff, 2);
    c.joint.classes.set(y, J, 3);
  }
  c.joint.classes.set(Poff, Pon, 1);
  for (std::size_t y = 0; y < 4; ++y) {
    c.joint.classes.set(y, I1, 0);
    c.joint.classes.set(I1, y, 0);
  }
  c.joint.classes.set(I1, J, 3);
  c.joint.coarse = {{"J/3", "J"}, {"P_on/1", "ON"}, {"P_off/2", "OFF"}};
  c.output = output_only(c.kernel, {"J"});
  c.joint_targets = {"J"};
  c.output_targets = {"J"};
  c.initial = "J";
  return c;
}

ExpPoly gene_f_tau(const GeneModelParams& p, double R) {
  const Channel c = gene_channel(p, R);
  return build_marginal(c.kernel, c.output).filtered().q(0, 0);
}

ModulatedKernel gene_modulated(const GeneModelParams& p, double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw InputError("prior probability must lie in [0, 1]");
  std::vector<SemiMarkovKernel> blocks;
  for (double R : {p.R0, p.R1}) blocks.emplace_back(std::vector<std::string>{"J"}, DensityMatrix{{gene_f_tau(p, R)}});
  return modulated_kernel({"c0", "c1"}, blocks, {1.0 - pi, pi});
}

SemiMarkovKernel leakage_kernel(const LeakageModelParams& p) {
  check_positive(p.k_on, "k_on");
  check_positive(p.k_off_R, "k_off_R");
  check_positive(p.kJ, "kJ");
  if (!(p.r > 0.0 && p.r < 1.0)) throw InputError("leak fraction r must lie in (0, 1)");
  enum { Xr, X1, J1, Jr };
  const double u1 = p.k_off_R + p.kJ;
  const double ur = p.k_on + p.kJ * p.r;
  DensityMatrix q(4, std::vector<ExpPoly>(4));
  for (int y : {X1, J1}) {
    q[y][Xr] = ExpPoly::exponential(u1, p.k_off_R);
    q[y][J1] = ExpPoly::exponential(u1, p.kJ);
  }
  for (int y : {Xr, Jr}) {
    q[y][X1] = ExpPoly::exponential(ur, p.k_on);
    q[y][Jr] = ExpPoly::exponential(ur, p.kJ * p.r);
  }
  return SemiMarkovKernel({"r", "1", "J1", "Jr"}, std::move(q));
}

Channel leakage_channel(const LeakageModelParams& p, const std::string& initial) {
  Channel c;
  c.name = "leakage";
  c.kernel = leakage_kernel(p);
  c.kernel.index(initial);
  c.joint = fully_observed(c.kernel);
  c.output = output_only(c.kernel, {"J1", "Jr"});
  c.joint_targets = {"J1", "Jr"};
  c.output_targets = {"J"};
  c.initial = initial;
  return c;
}

double leakage_phi_oracle(const LeakageModelParams& p, const std::string& initial, double t) {
  // Input chain on (1, r).
  Eigen::Matrix2d gen;
  gen << -p.k_off_R, p.k_off_R, p.k_on, -p.k_on;
  Eigen::RowVector2d p0 = Eigen::RowVector2d::Zero();
  if (initial == "1" || initial == "J1")
    p0(0) = 1.0;
  else if (initial == "r" || initial == "Jr")
    p0(1) = 1.0;
  else
    throw InputError("unknown leakage state '" + initial + "'");
  const Eigen::Matrix2d e = (gen * t).exp();
  const Eigen::RowVector2d pt = p0 * e;
  const double a = p.kJ, b = p.kJ * p.r;
  return a * std::log(a) * pt(0) + b * std::log(b) * pt(1);
}

double leakage_phi_oracle_limit(const LeakageModelParams& p) {
  const double pi1 = p.k_on / (p.k_on + p.k_off_R);
  const double a = p.kJ, b = p.kJ * p.r;
  return a * std::log(a) * pi1 + b * std::log(b) * (1.0 - pi1);
}

Channel poisson_channel(double k) {
  check_positive(k, "k");
  Channel c;
  c.name = "poisson";
  c.kernel = SemiMarkovKernel({"J"}, DensityMatrix{{ExpPoly::exponential(k)}});
  c.joint = output_only(c.kernel, {"J"});
  c.output = c.joint;
  c.joint_targets = {"J"};
  c.output_targets = {"J"};
  c.initial = "J";
  return c;
}

Channel erlang_channel(int shape, double k) {
  check_positive(k, "k");
  Channel c = poisson_channel(k);
  c.name = "erlang" + std::to_string(shape);
  c.kernel = SemiMarkovKernel({"J"}, DensityMatrix{{ExpPoly::erlang(shape, k)}});
  return c;
}

Channel independent_channel(double a, double b, double k) {
  check_positive(a, "a");
  check_positive(b, "b");
  check_positive(k, "k");
  enum { A, B, JA, JB };
  // Competing clocks: JA -> JA is a genuine self-transition.
  DensityMatrix clocks(4, std::vector<ExpPoly>(4));
  for (int y : {A, JA}) {
    clocks[y][B] = ExpPoly::exponential(a);
    clocks[y][JA] = ExpPoly::exponential(k);
  }
  for (int y : {B, JB}) {
    clocks[y][A] = ExpPoly::exponential(b);
    clocks[y][JB] = ExpPoly::exponential(k);
  }
  Channel c;
  c.name = "independent";
  c.kernel = smk_from_competing({"A", "B", "JA", "JB"}, clocks);
  c.joint = fully_observed(c.kernel);
  c.output = output_only(c.kernel, {"JA", "JB"});
  c.joint_targets = {"JA", "JB"};
  c.output_targets = {"J"};
  c.initial = "JA";
  return c;
}

std::vector<std::string> builtin_channels() {
  return {"gene", "gene-R0", "gene-R1", "poisson", "erlang2", "leakage", "independent"};
}

Channel channel_by_name(const std::string& name) {
  const GeneModelParams p;
  if (name == "gene" || name == "gene-R1") return gene_channel(p, p.R1);
  if (name == "gene-R0") return gene_channel(p, p.R0);
  if (name == "poisson") return poisson_channel(1.5);
  if (name == "erlang2") return erlang_channel(2, 1.0);
  if (name == "leakage") return leakage_channel(LeakageModelParams{});
  if (name == "independent") return independent_channel(0.5, 0.25, 1.0);
  throw InputError("unknown built-in model '" + name + "'");
}

}  // namespace mrpchan
