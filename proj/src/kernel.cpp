#include "mrpchan/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mrpchan/error.hpp"

namespace mrpchan {

SemiMarkovKernel::SemiMarkovKernel(std::vector<std::string> states, DensityMatrix q)
    : states_(std::move(states)), q_(std::move(q)) {
  const std::size_t n = states_.size();
  if (n == 0) throw InputError("kernel needs at least one state");
  if (std::set<std::string>(states_.begin(), states_.end()).size() != n)
    throw InputError("duplicate state labels");
  if (q_.size() != n) throw InputError("density matrix size does not match the state list");
  for (const auto& row : q_)
    if (row.size() != n) throw InputError("density matrix must be square");

  p_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  defect_.assign(n, 0.0);
  mean_sojourn_.assign(n, 0.0);
  double horizon = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    double row = 0.0, moment = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
      const ExpPoly& d = q_[y][z];
      if (d.is_zero()) continue;
      if (!d.all_rates_positive())
        throw InputError("density " + states_[y] + "->" + states_[z] + " does not decay");
      const double m = d.mass();
      if (m < -kMassTol) throw InputError("density " + states_[y] + "->" + states_[z] + " has negative mass");
      p_(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(z)) = m;
      row += m;
      moment += d.first_moment();
    }
    if (row > 1.0 + kMassTol)
      throw InputError("row " + states_[y] + " has total mass " + std::to_string(row) + " > 1");
    defect_[y] = std::abs(1.0 - row) <= kMassTol ? 0.0 : 1.0 - row;
    std::vector<ExpPoly> entries(q_[y].begin(), q_[y].end());
    sojourn_.push_back(sum(entries));
    survival_.push_back(sojourn_.back().is_zero() ? ExpPoly::constant(1.0)
                                                  : sojourn_.back().tail() + ExpPoly::constant(defect_[y]));
    mean_sojourn_[y] = defect_[y] > 0.0 ? std::numeric_limits<double>::infinity() : moment;
    if (row > 0.0) horizon = std::max(horizon, moment / row);
  }

  if (horizon > 0.0) {
    const double tmax = 20.0 * horizon;
    const double tmin = tmax * 1e-6;
    const double ratio = std::pow(tmax / tmin, 1.0 / (kValidationPoints - 2));
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z) {
        const ExpPoly& d = q_[y][z];
        if (d.is_zero()) continue;
        double t = 0.0;
        for (int i = 0; i < kValidationPoints; ++i) {
          if (d(t) < -(kNegTol + d.rounding_bound(t)))
            throw InputError("density " + states_[y] + "->" + states_[z] + " is negative at t = " +
                             std::to_string(t));
          t = i == 0 ? tmin : t * ratio;
        }
      }
  }
}

std::size_t SemiMarkovKernel::index(const std::string& label) const {
  auto it = std::find(states_.begin(), states_.end(), label);
  if (it == states_.end()) throw InputError("unknown state label '" + label + "'");
  return static_cast<std::size_t>(it - states_.begin());
}

SemiMarkovKernel SemiMarkovKernel::relabelled(std::vector<std::string> states) const {
  if (states.size() != states_.size()) throw InputError("relabelling changes the state count");
  SemiMarkovKernel k = *this;
  k.states_ = std::move(states);
  if (std::set<std::string>(k.states_.begin(), k.states_.end()).size() != k.states_.size())
    throw InputError("duplicate state labels");
  return k;
}

SemiMarkovKernel smk_from_generator(const GeneratorSpec& g) {
  const auto n = static_cast<Eigen::Index>(g.states.size());
  if (g.rates.rows() != n || g.rates.cols() != n) throw InputError("generator size does not match the state list");
  DensityMatrix q(g.states.size(), std::vector<ExpPoly>(g.states.size()));
  for (Eigen::Index y = 0; y < n; ++y) {
    double u = 0.0;
    for (Eigen::Index z = 0; z < n; ++z) {
      if (z == y) continue;
      const double r = g.rates(y, z);
      if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("generator rates must be finite and nonnegative");
      u += r;
    }
    for (Eigen::Index z = 0; z < n; ++z)
      if (z != y && g.rates(y, z) > 0.0)
        q[static_cast<std::size_t>(y)][static_cast<std::size_t>(z)] = ExpPoly::exponential(u, g.rates(y, z));
  }
  return SemiMarkovKernel(g.states, std::move(q));
}

SemiMarkovKernel smk_from_conditional(std::vector<std::string> states, const Eigen::MatrixXd& P,
                                      const DensityMatrix& ftilde) {
  const std::size_t n = states.size();
  if (static_cast<std::size_t>(P.rows()) != n || static_cast<std::size_t>(P.cols()) != n || ftilde.size() != n)
    throw InputError("conditional construction: size mismatch");
  DensityMatrix q(n, std::vector<ExpPoly>(n));
  for (std::size_t y = 0; y < n; ++y) {
    if (ftilde[y].size() != n) throw InputError("conditional construction: size mismatch");
    for (std::size_t z = 0; z < n; ++z) {
      const double p = P(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(z));
      if (p < 0.0) throw InputError("transition probabilities must be nonnegative");
      if (p == 0.0) continue;
      const ExpPoly& f = ftilde[y][z];
      if (f.is_zero() || std::abs(f.mass() - 1.0) > kMassTol)
        throw InputError("holding density " + states[y] + "->" + states[z] + " must have unit mass");
      q[y][z] = f * p;
    }
  }
  return SemiMarkovKernel(std::move(states), std::move(q));
}

SemiMarkovKernel smk_from_competing(std::vector<std::string> states, const DensityMatrix& clocks) {
  const std::size_t n = states.size();
  if (clocks.size() != n) throw InputError("competing construction: size mismatch");
  DensityMatrix q(n, std::vector<ExpPoly>(n));
  for (std::size_t y = 0; y < n; ++y) {
    if (clocks[y].size() != n) throw InputError("competing construction: size mismatch");
    std::vector<ExpPoly> surv(n);
    for (std::size_t x = 0; x < n; ++x) {
      const ExpPoly& f = clocks[y][x];
      if (f.is_zero()) continue;
      const double m = f.mass();
      if (m > 1.0 + kMassTol) throw InputError("clock density with mass above one");
      surv[x] = f.tail() + ExpPoly::constant(std::max(0.0, 1.0 - m));
    }
    for (std::size_t z = 0; z < n; ++z) {
      if (clocks[y][z].is_zero()) continue;
      ExpPoly prod = clocks[y][z];
      for (std::size_t x = 0; x < n; ++x)
        if (x != z && !clocks[y][x].is_zero()) prod = prod.times(surv[x]);
      q[y][z] = prod;
    }
  }
  return SemiMarkovKernel(std::move(states), std::move(q));
}

}  // namespace mrpchan
