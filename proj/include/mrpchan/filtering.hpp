#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrpchan/kernel.hpp"
#include "mrpchan/rational.hpp"

namespace mrpchan {

/// Class index per ordered transition (y, z); 0 = unobservable, -1 = unassigned.
struct TransitionClassMap {
  std::vector<std::vector<int>> cls;

  TransitionClassMap() = default;
  explicit TransitionClassMap(std::size_t n, int fill = -1) : cls(n, std::vector<int>(n, fill)) {}
  int operator()(std::size_t y, std::size_t z) const { return cls.at(y).at(z); }
  void set(std::size_t y, std::size_t z, int c) { cls.at(y).at(z) = c; }
};

/// Kernel on (state, class) pairs; labels are "state/class".
struct AugmentedKernel {
  SemiMarkovKernel kernel;
  std::vector<std::size_t> base;  // original state of each augmented state
  std::vector<int> cls;           // class of each augmented state
};

std::string augmented_label(const std::string& state, int cls);

/// Augmented states are the (z, i) pairs entered with positive probability.
AugmentedKernel augment(const SemiMarkovKernel& k, const TransitionClassMap& classes);

/// Kernel restricted to the kept states, hidden states integrated out.
struct FilteredKernel {
  SemiMarkovKernel kernel;
  RationalMatrix laplace;
  std::vector<std::size_t> keep;    // indices into the input kernel
  std::vector<std::size_t> hidden;  // hidden states reachable from keep
};

/// Laplace path: qcheck* = a* + b* (I - d*)^-1 c*, inverted entrywise.
FilteredKernel anderson_filter(const SemiMarkovKernel& k, const std::vector<std::size_t>& keep);

/// Time-domain path: A + B * (sum_k D^(k)) * C on the grid t_i = i h, i = 0..n,
/// truncated when rho^(k+1)/(1-rho) < tol, with one Richardson step (h, h/2).
/// Returns one matrix per grid point (|keep| x |keep|).
struct SeriesFilterResult {
  double h = 0.0;
  std::vector<Eigen::MatrixXd> values;
  int terms = 0;
  double spectral_radius = 0.0;
};
SeriesFilterResult anderson_filter_series(const SemiMarkovKernel& k, const std::vector<std::size_t>& keep, double T,
                                          double h, double tol = 1e-10, int max_terms = 10000);

/// Filtered kernel on Shat with its coarse-graining g: Shat -> M.
class FilterOutput {
 public:
  FilterOutput() = default;
  FilterOutput(SemiMarkovKernel filtered, std::vector<std::string> marks, std::vector<std::size_t> g,
               RationalMatrix laplace = {});

  const SemiMarkovKernel& filtered() const noexcept { return filtered_; }
  const RationalMatrix& laplace() const noexcept { return laplace_; }
  const std::vector<std::string>& marks() const noexcept { return marks_; }
  const std::vector<std::size_t>& g() const noexcept { return g_; }
  std::size_t mark_index(const std::string& mark) const;
  bool injective() const noexcept { return injective_; }
  std::size_t size() const noexcept { return filtered_.size(); }

  /// Members of g^-1(z).
  const std::vector<std::size_t>& members(std::size_t z) const { return members_.at(z); }
  /// fbar_alpha(z, t) = sum_{beta in g^-1(z)} qcheck_{alpha beta}(t).
  const ExpPoly& grouped(std::size_t alpha, std::size_t z) const { return grouped_.at(alpha).at(z); }
  const ExpPoly& survival(std::size_t alpha) const { return filtered_.survival(alpha); }

  /// Kernel on M; requires an injective g.
  SemiMarkovKernel marginal_kernel() const;

 private:
  SemiMarkovKernel filtered_;
  RationalMatrix laplace_;
  std::vector<std::string> marks_;
  std::vector<std::size_t> g_;
  bool injective_ = false;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::vector<ExpPoly>> grouped_;
};

/// Coarse-graining by label: every filtered state maps to a mark; marks must all be hit.
FilterOutput coarse_grain(const FilteredKernel& f, const std::map<std::string, std::string>& g);
FilterOutput coarse_grain(const SemiMarkovKernel& filtered, const std::map<std::string, std::string>& g,
                          RationalMatrix laplace = {});

/// Augmentation, filtering to the classes > 0 and coarse-graining in one go.
struct MarginalSpec {
  TransitionClassMap classes;
  std::map<std::string, std::string> coarse;  // "state/class" -> mark
};
FilterOutput build_marginal(const SemiMarkovKernel& k, const MarginalSpec& spec);

/// First-observable-event densities qcheck0_{(xi,0), alpha} over the filtered states,
/// from a fresh start copy of xi.
std::vector<ExpPoly> transient_densities(const SemiMarkovKernel& k, const MarginalSpec& spec, const FilterOutput& sys,
                                         std::size_t xi);
/// ftilde_{xi z}: transient_densities grouped by mark.
std::vector<ExpPoly> transient_row(const SemiMarkovKernel& k, const MarginalSpec& spec, const FilterOutput& sys,
                                   std::size_t xi);

/// Block-diagonal kernel diag(Q^(c)) on C x S with labels "c:state".
struct ModulatedKernel {
  SemiMarkovKernel kernel;
  std::vector<std::string> blocks;
  std::vector<double> prior;
  std::size_t block_size = 0;
};
ModulatedKernel modulated_kernel(const std::vector<std::string>& names, const std::vector<SemiMarkovKernel>& blocks,
                                 const std::vector<double>& prior);

}  // namespace mrpchan
