#include "mrpchan/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include <boost/math/tools/roots.hpp>

#include "mrpchan/error.hpp"
#include "mrpchan/intensity.hpp"
#include "mrpchan/log.hpp"

namespace mrpchan {

namespace {

constexpr std::size_t kChunk = 1024;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Runs fn(begin, end, acc) over fixed chunks of [0, n) on `threads` workers and
/// combines the chunk accumulators pairwise in chunk order, so the result does not
/// depend on the thread count.
template <class Acc, class Fn>
Acc run_chunks(std::size_t n, unsigned threads, const Acc& zero, Fn fn) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Acc> parts(chunks, zero);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        fn(c * kChunk, std::min(n, (c + 1) * kChunk), parts[c]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = chunks;
      }
    }
  };
  const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(chunks, 1))));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < t; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  if (parts.empty()) return zero;
  for (std::size_t width = 1; width < parts.size(); width *= 2)
    for (std::size_t i = 0; i + width < parts.size(); i += 2 * width) parts[i].merge(parts[i + width]);
  return parts[0];
}

struct Moments {
  std::vector<double> sum, sumsq;
  std::size_t count = 0, discarded = 0;

  explicit Moments(std::size_t k = 1) : sum(k, 0.0), sumsq(k, 0.0) {}
  void merge(const Moments& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sumsq[i] += o.sumsq[i];
    }
    count += o.count;
    discarded += o.discarded;
  }
  std::pair<double, double> mean_se(std::size_t i) const {
    if (count == 0) return {0.0, 0.0};
    const double n = static_cast<double>(count);
    const double mean = sum[i] / n;
    const double var = count > 1 ? std::max(0.0, (sumsq[i] - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n)};
  }
};

void check_discards(std::size_t discarded, std::size_t n, double budget) {
  if (n > 0 && static_cast<double>(discarded) > budget * static_cast<double>(n))
    throw NumericError("filter degeneracy discarded " + std::to_string(discarded) + " of " + std::to_string(n) +
                       " trajectories, above the budget");
  if (discarded > 0) logger().warn("discarded {} of {} trajectories after filter degeneracy", discarded, n);
}

/// Running filter of one marginal system along a simulated full-kernel path.
class SystemFilter {
 public:
  explicit SystemFilter(const MarginalSystem& m) : m_(&m) {
    if (m.start.observed) tracker_.emplace(m.sys, theta_from_weights(m.sys, m.theta0));
  }
  double log_hazard(double t) const {
    if (tracker_) return tracker_->log_hazard(m_->targets, t);
    return hazard_transient(m_->start.first, m_->targets, t).log_value;
  }
  void observe(std::size_t mark, double t) {
    if (tracker_)
      tracker_->observe(mark, t);
    else
      tracker_.emplace(m_->sys, theta_first_event(m_->sys, m_->start_densities, mark, t));
  }

 private:
  const MarginalSystem* m_;
  std::optional<FilterTracker> tracker_;
};

}  // namespace

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t part) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(part), static_cast<std::uint32_t>(part >> 32)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

MrpSampler::MrpSampler(const SemiMarkovKernel& k) : k_(&k), laws_(k.size(), std::vector<Law>(k.size())) {
  for (std::size_t y = 0; y < k.size(); ++y)
    for (std::size_t z = 0; z < k.size(); ++z) {
      const ExpPoly& q = k.q(y, z);
      if (q.is_zero()) continue;
      Law& l = laws_[y][z];
      l.p = k.P()(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(z));
      l.density = q * (1.0 / q.mass());
      if (q.is_single_exponential()) l.rate = q.terms()[0].rate.real();
      l.mean = l.density.first_moment();
    }
}

double MrpSampler::holding_quantile(std::size_t y, std::size_t z, double u) const {
  const Law& l = laws_.at(y).at(z);
  if (l.p <= 0.0) throw InputError("transition has zero probability");
  if (l.rate > 0.0) return -std::log1p(-u) / l.rate;
  return quantile(l.density, l.mean, u);
}

double MrpSampler::quantile(const ExpPoly& density, double mean, double u) {
  auto f = [&](double t) { return density.cumulative(t) - u; };
  double hi = std::max(mean, 1e-12);
  for (int i = 0; f(hi) < 0.0; ++i) {
    if (i > 2000) throw ConvergenceError("holding-time quantile could not be bracketed");
    hi *= 2.0;
  }
  double lo = 0.0;
  if (f(lo) >= 0.0) return 0.0;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, hi, [&](double a, double b) { return std::abs(f(0.5 * (a + b))) < 1e-12 || b - a <= 1e-15 * b; }, iters);
  return 0.5 * (r.first + r.second);
}

std::pair<std::size_t, double> MrpSampler::next(std::size_t y, std::mt19937_64& rng) const {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  double acc = 0.0;
  for (std::size_t z = 0; z < laws_[y].size(); ++z) {
    acc += laws_[y][z].p;
    if (laws_[y][z].p > 0.0 && u1 < acc) return {z, holding_quantile(y, z, u2)};
  }
  // Rounding can leave a sliver above the last cumulative value of a proper row.
  if (k_->defect(y) == 0.0)
    for (std::size_t z = laws_[y].size(); z-- > 0;)
      if (laws_[y][z].p > 0.0) return {z, holding_quantile(y, z, u2)};
  return {k_->size(), std::numeric_limits<double>::infinity()};
}

Trajectory simulate_mrp(const SemiMarkovKernel& k, std::size_t z0, double T, std::uint64_t seed,
                        std::uint64_t index) {
  if (z0 >= k.size()) throw InputError("initial state out of range");
  if (!(T > 0.0)) throw InputError("horizon must be positive");
  const MrpSampler sampler(k);
  auto rng = trajectory_rng(seed, index);
  Trajectory tr;
  tr.initial = z0;
  tr.horizon = T;
  std::size_t y = z0;
  double t = 0.0;
  for (;;) {
    const auto [z, w] = sampler.next(y, rng);
    if (z == k.size()) {
      tr.absorbed = true;
      break;
    }
    double tn = t + w;
    if (tn > T) break;
    if (tn <= t) {
      tn = std::nextafter(t, std::numeric_limits<double>::infinity());
      logger().warn("coincident event times at t = {}; perturbed by one ulp", t);
    }
    tr.times.push_back(tn);
    tr.states.push_back(z);
    t = tn;
    y = z;
  }
  return tr;
}

MCEstimate mc_mi_dynamic(const Channel& channel, const ChannelSystems& systems, double T, const MCOptions& opt) {
  if (!(T >= 0.0)) throw InputError("horizon must be nonnegative");
  if (opt.n_traj == 0) throw InputError("need at least one trajectory");
  const SemiMarkovKernel& k = channel.kernel;
  const MrpSampler sampler(k);
  const std::size_t z0 = k.index(channel.initial);
  std::vector<bool> y_target(systems.output.sys.size(), false);
  for (std::size_t a = 0; a < systems.output.sys.size(); ++a)
    y_target[a] = std::find(systems.output.targets.begin(), systems.output.targets.end(), systems.output.sys.g()[a]) !=
                  systems.output.targets.end();

  auto one = [&](std::size_t i) {
    auto rng = trajectory_rng(opt.seed, i);
    SystemFilter xy(systems.joint), out(systems.output);
    double acc = 0.0, t = 0.0;
    std::size_t y = z0;
    for (;;) {
      const auto [z, w] = sampler.next(y, rng);
      if (z == k.size() || t + w > T) break;
      const double tn = w > 0.0 ? t + w : std::nextafter(t, std::numeric_limits<double>::infinity());
      const long a_xy = systems.joint.entered[y][z];
      const long a_y = systems.output.entered[y][z];
      if (a_y >= 0 && y_target[static_cast<std::size_t>(a_y)]) acc += xy.log_hazard(tn) - out.log_hazard(tn);
      if (a_xy >= 0) xy.observe(systems.joint.sys.g()[static_cast<std::size_t>(a_xy)], tn);
      if (a_y >= 0) out.observe(systems.output.sys.g()[static_cast<std::size_t>(a_y)], tn);
      t = tn;
      y = z;
    }
    if (!std::isfinite(acc)) throw DegeneracyError("non-finite log-intensity ratio");
    return acc;
  };

  const Moments m = run_chunks(opt.n_traj, opt.threads, Moments(1), [&](std::size_t b, std::size_t e, Moments& acc) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        const double v = one(i);
        acc.sum[0] += v;
        acc.sumsq[0] += v * v;
        ++acc.count;
      } catch (const NumericError&) {
        ++acc.discarded;
      }
    }
  });
  check_discards(m.discarded, opt.n_traj, opt.discard_budget);
  MCEstimate r;
  std::tie(r.value, r.se) = m.mean_se(0);
  r.samples = m.count;
  r.discarded = m.discarded;
  r.seed = opt.seed;
  return r;
}

StaticModel gene_static_model(const GeneModelParams& p) {
  StaticModel m;
  for (double R : {p.R0, p.R1}) m.blocks.emplace_back(std::vector<std::string>{"J"}, DensityMatrix{{gene_f_tau(p, R)}});
  m.initial = "J";
  return m;
}

std::vector<std::vector<double>> binary_priors(const std::vector<double>& pis) {
  std::vector<std::vector<double>> out;
  for (double pi : pis) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw InputError("prior probability must lie in [0, 1]");
    out.push_back({1.0 - pi, pi});
  }
  return out;
}

MCGrid mc_mi_static(const StaticModel& model, const std::vector<std::vector<double>>& priors,
                    const std::vector<double>& T_grid, const MCOptions& opt) {
  const std::size_t nb = model.blocks.size();
  if (nb == 0) throw InputError("static model needs at least one block");
  if (opt.n_traj == 0) throw InputError("need at least one trajectory");
  if (T_grid.empty()) throw InputError("empty horizon grid");
  for (std::size_t j = 0; j < T_grid.size(); ++j)
    if (!(T_grid[j] >= 0.0) || (j > 0 && !(T_grid[j] > T_grid[j - 1])))
      throw InputError("horizon grid must be nonnegative and increasing");
  for (const auto& b : model.blocks)
    if (b.states() != model.blocks[0].states()) throw InputError("blocks must share the state space");
  for (const auto& p : priors) {
    if (p.size() != nb) throw InputError("prior size does not match the block count");
    double s = 0.0;
    for (double x : p) {
      if (!(x >= 0.0)) throw InputError("prior weights must be nonnegative");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-12) throw InputError("prior must sum to one");
  }
  const std::size_t z0 = model.blocks[0].index(model.initial);
  std::vector<MrpSampler> samplers;
  for (const auto& b : model.blocks) samplers.emplace_back(b);
  const std::size_t nT = T_grid.size();
  const double t_max = T_grid.back();
  // Equilibrium first-interval law per block: density S/E[tau] and its survival.
  std::vector<ExpPoly> eq_density, eq_survival;
  std::vector<double> eq_mean;
  if (model.stationary_start) {
    for (const auto& b : model.blocks) {
      if (b.size() != 1) throw CapabilityError("stationary start is supported for renewal blocks only");
      const ExpPoly d = b.survival(0) * (1.0 / b.mean_sojourn(0));
      eq_density.push_back(d);
      eq_survival.push_back(d.tail());
      eq_mean.push_back(d.first_moment());
    }
  }

  // ll[b][c][j] = ln p(path of block b up to T_j | C = c).
  auto simulate_block = [&](std::size_t i, std::size_t b, std::vector<std::vector<double>>& ll) {
    auto rng = trajectory_rng(opt.seed, i, 1 + b);
    std::vector<double> running(nb, 0.0);
    std::size_t y = z0, j = 0;
    double t = 0.0;
    bool first = model.stationary_start;
    auto snapshot_until = [&](double upto) {
      while (j < nT && T_grid[j] < upto) {
        for (std::size_t c = 0; c < nb; ++c)
          ll[c][j] = running[c] + (first ? eq_survival[c] : model.blocks[c].survival(y)).log_value(T_grid[j] - t);
        ++j;
      }
    };
    if (first) {
      const double u1 = uniform01(rng);
      (void)u1;  // keeps two uniforms per event
      const double w = MrpSampler::quantile(eq_density[b], eq_mean[b], uniform01(rng));
      snapshot_until(std::min(w, std::nextafter(t_max, std::numeric_limits<double>::infinity())));
      if (j >= nT) return;
      for (std::size_t c = 0; c < nb; ++c) running[c] += eq_density[c].log_value(w);
      first = false;
      t = w;
    }
    for (;;) {
      const auto [z, w] = samplers[b].next(y, rng);
      const double tn = z == model.blocks[b].size() ? std::numeric_limits<double>::infinity() : t + w;
      snapshot_until(std::min(tn, std::nextafter(t_max, std::numeric_limits<double>::infinity())));
      if (j >= nT || !std::isfinite(tn)) break;
      for (std::size_t c = 0; c < nb; ++c) running[c] += model.blocks[c].q(y, z).log_value(tn - t);
      t = tn;
      y = z;
    }
    snapshot_until(std::numeric_limits<double>::infinity());
  };

  const std::size_t cells = priors.size() * nT;
  const Moments m = run_chunks(opt.n_traj, opt.threads, Moments(cells), [&](std::size_t b0, std::size_t e, Moments& acc) {
    std::vector<std::vector<std::vector<double>>> ll(nb, std::vector<std::vector<double>>(nb, std::vector<double>(nT)));
    std::vector<double> vals(cells), terms;
    for (std::size_t i = b0; i < e; ++i) {
      auto rng = trajectory_rng(opt.seed, i, 0);
      const double uc = uniform01(rng);
      for (std::size_t b = 0; b < nb; ++b) simulate_block(i, b, ll[b]);
      bool ok = true;
      for (std::size_t p = 0; p < priors.size() && ok; ++p) {
        std::size_t c = 0;
        double cum = 0.0;
        for (std::size_t x = 0; x < nb; ++x) {
          if (priors[p][x] <= 0.0) continue;
          c = x;
          cum += priors[p][x];
          if (uc < cum) break;
        }
        for (std::size_t j = 0; j < nT; ++j) {
          terms.clear();
          for (std::size_t x = 0; x < nb; ++x)
            if (priors[p][x] > 0.0) terms.push_back(std::log(priors[p][x]) + ll[c][x][j]);
          const double own = ll[c][c][j];
          const double mix = log_sum_exp(terms);
          if (!std::isfinite(own) || !std::isfinite(mix)) {
            ok = false;
            break;
          }
          vals[p * nT + j] = own - mix;
        }
      }
      if (!ok) {
        ++acc.discarded;
        continue;
      }
      for (std::size_t k = 0; k < cells; ++k) {
        acc.sum[k] += vals[k];
        acc.sumsq[k] += vals[k] * vals[k];
      }
      ++acc.count;
    }
  });
  check_discards(m.discarded, opt.n_traj, opt.discard_budget);
  MCGrid g;
  g.priors = priors;
  g.T = T_grid;
  g.value.assign(priors.size(), std::vector<double>(nT));
  g.se.assign(priors.size(), std::vector<double>(nT));
  for (std::size_t p = 0; p < priors.size(); ++p)
    for (std::size_t j = 0; j < nT; ++j) std::tie(g.value[p][j], g.se[p][j]) = m.mean_se(p * nT + j);
  g.samples = m.count;
  g.discarded = m.discarded;
  g.seed = opt.seed;
  return g;
}

}  // namespace mrpchan
