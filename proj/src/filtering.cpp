#include "mrpchan/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mrpchan/convolution.hpp"
#include "mrpchan/error.hpp"
#include "mrpchan/log.hpp"

namespace mrpchan {

std::string augmented_label(const std::string& state, int cls) { return state + "/" + std::to_string(cls); }

AugmentedKernel augment(const SemiMarkovKernel& k, const TransitionClassMap& classes) {
  const std::size_t n = k.size();
  if (classes.cls.size() != n) throw InputError("class map size does not match the kernel");
  std::set<std::pair<std::size_t, int>> observable, hidden;
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t z = 0; z < n; ++z) {
      if (k.q(y, z).is_zero()) continue;
      const int c = classes(y, z);
      if (c < 0) throw InputError("transition " + k.label(y) + "->" + k.label(z) + " has no class");
      (c > 0 ? observable : hidden).insert({z, c});
    }
  AugmentedKernel out;
  std::vector<std::string> labels;
  for (const auto* set : {&observable, &hidden})
    for (const auto& [z, c] : *set) {
      out.base.push_back(z);
      out.cls.push_back(c);
      labels.push_back(augmented_label(k.label(z), c));
    }
  const std::size_t m = labels.size();
  DensityMatrix q(m, std::vector<ExpPoly>(m));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      const std::size_t y = out.base[a], z = out.base[b];
      if (!k.q(y, z).is_zero() && classes(y, z) == out.cls[b]) q[a][b] = k.q(y, z);
    }
  out.kernel = SemiMarkovKernel(std::move(labels), std::move(q));
  return out;
}

namespace {

std::vector<std::size_t> reachable_hidden(const SemiMarkovKernel& k, const std::vector<std::size_t>& keep) {
  const std::size_t n = k.size();
  std::vector<char> is_keep(n, 0), seen(n, 0);
  for (auto i : keep) {
    if (i >= n) throw InputError("keep index out of range");
    is_keep[i] = 1;
  }
  std::vector<std::size_t> stack;
  for (auto i : keep)
    for (std::size_t z = 0; z < n; ++z)
      if (!is_keep[z] && !seen[z] && !k.q(i, z).is_zero()) {
        seen[z] = 1;
        stack.push_back(z);
      }
  while (!stack.empty()) {
    const std::size_t y = stack.back();
    stack.pop_back();
    for (std::size_t z = 0; z < n; ++z)
      if (!is_keep[z] && !seen[z] && !k.q(y, z).is_zero()) {
        seen[z] = 1;
        stack.push_back(z);
      }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (seen[i]) out.push_back(i);
  return out;
}

RationalMatrix block_lt(const SemiMarkovKernel& k, const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& cols) {
  RationalMatrix m(rows.size(), std::vector<RationalLT>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) m[i][j] = lt_of(k.q(rows[i], cols[j]));
  return m;
}

double spectral_radius(const SemiMarkovKernel& k, const std::vector<std::size_t>& hidden) {
  if (hidden.empty()) return 0.0;
  Eigen::MatrixXd d(static_cast<Eigen::Index>(hidden.size()), static_cast<Eigen::Index>(hidden.size()));
  for (std::size_t i = 0; i < hidden.size(); ++i)
    for (std::size_t j = 0; j < hidden.size(); ++j)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k.P()(static_cast<Eigen::Index>(hidden[i]),
                                                                              static_cast<Eigen::Index>(hidden[j]));
  return d.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

FilteredKernel anderson_filter(const SemiMarkovKernel& k, const std::vector<std::size_t>& keep) {
  if (keep.empty()) throw InputError("filtering needs at least one kept state");
  if (std::set<std::size_t>(keep.begin(), keep.end()).size() != keep.size())
    throw InputError("duplicate kept states");
  FilteredKernel out;
  out.keep = keep;
  out.hidden = reachable_hidden(k, keep);
  const RationalMatrix a = block_lt(k, keep, keep);
  if (out.hidden.empty()) {
    out.laplace = a;
  } else {
    const RationalMatrix b = block_lt(k, keep, out.hidden);
    const RationalMatrix c = block_lt(k, out.hidden, keep);
    const RationalMatrix d = block_lt(k, out.hidden, out.hidden);
    const RationalMatrix series = neumann_series(d);
    out.laplace = add(a, multiply(multiply(b, series), c));
  }
  const std::size_t m = keep.size();
  DensityMatrix q(m, std::vector<ExpPoly>(m));
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < m; ++i) {
    labels.push_back(k.label(keep[i]));
    for (std::size_t j = 0; j < m; ++j) {
      const Inversion inv = invert_lt_checked(out.laplace[i][j]);
      if (inv.ill_conditioned)
        logger().warn("filtered entry {}->{} is ill-conditioned", labels.back(), k.label(keep[j]));
      q[i][j] = inv.f;
    }
  }
  out.kernel = SemiMarkovKernel(std::move(labels), std::move(q));
  return out;
}

namespace {

using GridMatrices = std::vector<Eigen::MatrixXd>;

/// (K * Y)(t_i) for a matrix of exp-poly kernels against a matrix grid signal.
GridMatrices convolve_grid(const SemiMarkovKernel& k, const std::vector<std::size_t>& rows,
                           const std::vector<std::size_t>& mids, const GridMatrices& y, double h) {
  const std::size_t n = y.size();
  const auto cols = y.empty() ? 0 : y[0].cols();
  GridMatrices out(n, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), cols));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t c = 0; c < mids.size(); ++c) {
      const ExpPoly& kern = k.q(rows[a], mids[c]);
      if (kern.is_zero()) continue;
      for (Eigen::Index b = 0; b < cols; ++b) {
        ExpKernelConvolution conv(kern, h);
        for (std::size_t i = 0; i + 1 < n; ++i) {
          conv.begin_linear(y[i](static_cast<Eigen::Index>(c), b));
          conv.commit_linear(y[i + 1](static_cast<Eigen::Index>(c), b));
          out[i + 1](static_cast<Eigen::Index>(a), b) += conv.value();
        }
      }
    }
  return out;
}

GridMatrices sample(const SemiMarkovKernel& k, const std::vector<std::size_t>& rows,
                    const std::vector<std::size_t>& cols, std::size_t n, double h) {
  GridMatrices out(n, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                            static_cast<Eigen::Index>(cols.size())));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < cols.size(); ++b)
        out[i](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            k.q(rows[a], cols[b])(static_cast<double>(i) * h);
  return out;
}

GridMatrices series_once(const SemiMarkovKernel& k, const std::vector<std::size_t>& keep,
                         const std::vector<std::size_t>& hidden, std::size_t n, double h, int terms) {
  GridMatrices a = sample(k, keep, keep, n, h);
  if (hidden.empty()) return a;
  GridMatrices y = sample(k, hidden, keep, n, h);
  GridMatrices total = y;
  for (int it = 1; it <= terms; ++it) {
    y = convolve_grid(k, hidden, hidden, y, h);
    for (std::size_t i = 0; i < n; ++i) total[i] += y[i];
  }
  const GridMatrices bx = convolve_grid(k, keep, hidden, total, h);
  for (std::size_t i = 0; i < n; ++i) a[i] += bx[i];
  return a;
}

}  // namespace

SeriesFilterResult anderson_filter_series(const SemiMarkovKernel& k, const std::vector<std::size_t>& keep, double T,
                                          double h, double tol, int max_terms) {
  if (!(T > 0.0) || !(h > 0.0)) throw InputError("series filter needs positive T and h");
  SeriesFilterResult out;
  out.h = h;
  const auto hidden = reachable_hidden(k, keep);
  const double rho = spectral_radius(k, hidden);
  out.spectral_radius = rho;
  if (rho >= 1.0 - 1e-9) throw ConvergenceError("hidden block is absorbing");
  int terms = 0;
  if (rho > 0.0) {
    while (std::pow(rho, terms + 1) / (1.0 - rho) >= tol && terms < max_terms) ++terms;
    if (terms >= max_terms) throw ConvergenceError("series truncation exceeds the term cap");
  } else if (!hidden.empty()) {
    terms = static_cast<int>(hidden.size());  // nilpotent hidden block
  }
  out.terms = terms;
  const auto n = static_cast<std::size_t>(std::llround(T / h)) + 1;
  const GridMatrices coarse = series_once(k, keep, hidden, n, h, terms);
  const GridMatrices fine = series_once(k, keep, hidden, 2 * n - 1, 0.5 * h, terms);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
  return out;
}

FilterOutput::FilterOutput(SemiMarkovKernel filtered, std::vector<std::string> marks, std::vector<std::size_t> g,
                           RationalMatrix laplace)
    : filtered_(std::move(filtered)), laplace_(std::move(laplace)), marks_(std::move(marks)), g_(std::move(g)) {
  if (g_.size() != filtered_.size()) throw InputError("coarse-graining must map every filtered state");
  members_.assign(marks_.size(), {});
  for (std::size_t a = 0; a < g_.size(); ++a) {
    if (g_[a] >= marks_.size()) throw InputError("coarse-graining maps outside the mark set");
    members_[g_[a]].push_back(a);
  }
  for (std::size_t z = 0; z < marks_.size(); ++z)
    if (members_[z].empty()) throw InputError("coarse-graining is not surjective: mark '" + marks_[z] + "' unused");
  injective_ = marks_.size() == g_.size();
  grouped_.assign(filtered_.size(), std::vector<ExpPoly>(marks_.size()));
  for (std::size_t a = 0; a < filtered_.size(); ++a)
    for (std::size_t z = 0; z < marks_.size(); ++z) {
      std::vector<ExpPoly> parts;
      for (auto b : members_[z]) parts.push_back(filtered_.q(a, b));
      grouped_[a][z] = sum(parts);
    }
}

std::size_t FilterOutput::mark_index(const std::string& mark) const {
  auto it = std::find(marks_.begin(), marks_.end(), mark);
  if (it == marks_.end()) throw InputError("unknown mark '" + mark + "'");
  return static_cast<std::size_t>(it - marks_.begin());
}

SemiMarkovKernel FilterOutput::marginal_kernel() const {
  if (!injective_) throw CapabilityError("coarse-graining is not injective; the marginal is not Markov renewal");
  const std::size_t m = marks_.size();
  DensityMatrix q(m, std::vector<ExpPoly>(m));
  for (std::size_t y = 0; y < m; ++y)
    for (std::size_t z = 0; z < m; ++z) q[y][z] = filtered_.q(members_[y][0], members_[z][0]);
  return SemiMarkovKernel(marks_, std::move(q));
}

FilterOutput coarse_grain(const SemiMarkovKernel& filtered, const std::map<std::string, std::string>& g,
                          RationalMatrix laplace) {
  std::vector<std::string> marks;
  std::vector<std::size_t> idx;
  for (const auto& label : filtered.states()) {
    auto it = g.find(label);
    if (it == g.end()) throw InputError("coarse-graining does not map state '" + label + "'");
    auto m = std::find(marks.begin(), marks.end(), it->second);
    if (m == marks.end()) {
      marks.push_back(it->second);
      idx.push_back(marks.size() - 1);
    } else {
      idx.push_back(static_cast<std::size_t>(m - marks.begin()));
    }
  }
  for (const auto& [label, mark] : g)
    if (std::find(marks.begin(), marks.end(), mark) == marks.end())
      throw InputError("coarse-graining is not surjective: mark '" + mark + "' is never reached");
  return FilterOutput(filtered, std::move(marks), std::move(idx), std::move(laplace));
}

FilterOutput coarse_grain(const FilteredKernel& f, const std::map<std::string, std::string>& g) {
  return coarse_grain(f.kernel, g, f.laplace);
}

FilterOutput build_marginal(const SemiMarkovKernel& k, const MarginalSpec& spec) {
  const AugmentedKernel aug = augment(k, spec.classes);
  std::vector<std::size_t> keep;
  for (std::size_t a = 0; a < aug.cls.size(); ++a)
    if (aug.cls[a] > 0) keep.push_back(a);
  return coarse_grain(anderson_filter(aug.kernel, keep), spec.coarse);
}

std::vector<ExpPoly> transient_densities(const SemiMarkovKernel& k, const MarginalSpec& spec, const FilterOutput& sys,
                                         std::size_t xi) {
  if (xi >= k.size()) throw InputError("initial state out of range");
  const AugmentedKernel aug = augment(k, spec.classes);
  const std::size_t m = aug.kernel.size();
  std::vector<std::string> labels = aug.kernel.states();
  labels.push_back(k.label(xi) + "/start");
  DensityMatrix q(m + 1, std::vector<ExpPoly>(m + 1));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) q[a][b] = aug.kernel.q(a, b);
  for (std::size_t b = 0; b < m; ++b) {
    const std::size_t z = aug.base[b];
    if (!k.q(xi, z).is_zero() && spec.classes(xi, z) == aug.cls[b]) q[m][b] = k.q(xi, z);
  }
  const SemiMarkovKernel ext(std::move(labels), std::move(q));

  std::vector<std::size_t> keep;
  for (const auto& label : sys.filtered().states()) keep.push_back(ext.index(label));
  keep.push_back(m);
  const FilteredKernel f = anderson_filter(ext, keep);
  const std::size_t start = keep.size() - 1;
  std::vector<ExpPoly> out(sys.size());
  for (std::size_t a = 0; a < sys.size(); ++a) out[a] = f.kernel.q(start, a);
  return out;
}

std::vector<ExpPoly> transient_row(const SemiMarkovKernel& k, const MarginalSpec& spec, const FilterOutput& sys,
                                   std::size_t xi) {
  const std::vector<ExpPoly> dens = transient_densities(k, spec, sys, xi);
  std::vector<ExpPoly> row(sys.marks().size());
  for (std::size_t z = 0; z < sys.marks().size(); ++z) {
    std::vector<ExpPoly> parts;
    for (auto a : sys.members(z)) parts.push_back(dens[a]);
    row[z] = sum(parts);
  }
  return row;
}

ModulatedKernel modulated_kernel(const std::vector<std::string>& names, const std::vector<SemiMarkovKernel>& blocks,
                                 const std::vector<double>& prior) {
  if (blocks.empty() || names.size() != blocks.size() || prior.size() != blocks.size())
    throw InputError("modulation needs one name and one prior weight per block");
  double total = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0)) throw InputError("prior weights must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("prior must sum to one");
  const std::size_t s = blocks[0].size();
  for (const auto& b : blocks)
    if (b.size() != s) throw InputError("modulation blocks must share the state count");
  const std::size_t n = s * blocks.size();
  DensityMatrix q(n, std::vector<ExpPoly>(n));
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < blocks.size(); ++c)
    for (std::size_t y = 0; y < s; ++y) {
      labels.push_back(names[c] + ":" + blocks[c].label(y));
      for (std::size_t z = 0; z < s; ++z) q[c * s + y][c * s + z] = blocks[c].q(y, z);
    }
  ModulatedKernel out;
  out.kernel = SemiMarkovKernel(std::move(labels), std::move(q));
  out.blocks = names;
  out.prior = prior;
  out.block_size = s;
  return out;
}

}  // namespace mrpchan
