#include "mrpchan/convolution.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "mrpchan/error.hpp"

namespace mrpchan {

namespace {

constexpr int kGaussPoints = 20;
constexpr int kGradedLevels = 48;

struct Rule {
  std::vector<double> x, w;  // on [-1, 1]
};

const Rule& gauss_rule() {
  static const Rule rule = [] {
    using G = boost::math::quadrature::gauss<double, kGaussPoints>;
    Rule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        r.x.push_back(0.0);
        r.w.push_back(w[i]);
        continue;
      }
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
      r.x.push_back(-a[i]);
      r.w.push_back(w[i]);
    }
    return r;
  }();
  return rule;
}

void append_segment(double a, double b, std::vector<double>& x, std::vector<double>& w) {
  const Rule& r = gauss_rule();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t k = 0; k < r.x.size(); ++k) {
    x.push_back(mid + half * r.x[k]);
    w.push_back(half * r.w[k]);
  }
}

/// Nodes and weights for the interval [t0, t0 + h]; graded towards t0 when first.
void interval_rule(double t0, double h, bool graded, std::vector<double>& x, std::vector<double>& w) {
  x.clear();
  w.clear();
  if (!graded) {
    append_segment(t0, t0 + h, x, w);
    return;
  }
  double b = h;
  for (int j = 0; j < kGradedLevels; ++j) {
    append_segment(t0 + 0.5 * b, t0 + b, x, w);
    b *= 0.5;
  }
  append_segment(t0, t0 + b, x, w);
}

}  // namespace

ExpKernelConvolution::ExpKernelConvolution(const ExpPoly& kernel, double h) : h_(h) {
  if (!(h > 0.0)) throw InputError("grid step must be positive");
  int maxp = 0;
  for (const auto& t : kernel.terms()) maxp = std::max(maxp, t.power);
  binom_.assign(static_cast<std::size_t>(maxp + 1), {});
  for (int l = 0; l <= maxp; ++l) {
    binom_[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(l + 1), 1.0);
    for (int a = 1; a < l; ++a)
      binom_[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)] =
          binom_[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(a - 1)] +
          binom_[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(a)];
  }
  std::vector<double> x, w;
  interval_rule(0.0, h, false, x, w);
  for (const auto& t : kernel.terms()) {
    Term term;
    term.coeff = t.coeff;
    term.power = t.power;
    term.rate = t.rate;
    term.decay = std::exp(-t.rate * h);
    const std::size_t n = static_cast<std::size_t>(t.power + 1);
    term.s.assign(n, 0.0);
    term.next.assign(n, 0.0);
    term.alpha.assign(n, 0.0);
    term.beta.assign(n, 0.0);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double u = x[k];
      const cplx e = std::exp(-t.rate * u) * w[k];
      double pw = 1.0;
      for (std::size_t l = 0; l < n; ++l) {
        term.alpha[l] += pw * e * (1.0 - u / h);
        term.beta[l] += pw * e * (u / h);
        pw *= u;
      }
    }
    terms_.push_back(std::move(term));
  }
}

void ExpKernelConvolution::propagate() {
  for (auto& t : terms_) {
    const std::size_t n = t.s.size();
    for (std::size_t l = 0; l < n; ++l) {
      cplx acc = 0.0;
      double hp = 1.0;  // h^(l-a), a running downwards from l
      for (std::size_t a = l + 1; a-- > 0;) {
        acc += binom_[l][a] * hp * t.s[a];
        hp *= h_;
      }
      t.next[l] = t.decay * acc;
    }
  }
}

double ExpKernelConvolution::combine(const std::vector<Term>& terms, bool use_next) const {
  double v = 0.0;
  for (const auto& t : terms) {
    const cplx s = use_next ? t.next.back() : t.s.back();
    v += (t.coeff * s).real();
  }
  return v;
}

void ExpKernelConvolution::begin_linear(double y_i) {
  propagate();
  weight_ = 0.0;
  for (auto& t : terms_) {
    for (std::size_t l = 0; l < t.next.size(); ++l) t.next[l] += y_i * t.beta[l];
    weight_ += (t.coeff * t.alpha.back()).real();
  }
  pending_ = combine(terms_, true);
}

void ExpKernelConvolution::commit_linear(double y_next) {
  for (auto& t : terms_)
    for (std::size_t l = 0; l < t.s.size(); ++l) t.s[l] = t.next[l] + y_next * t.alpha[l];
  value_ = combine(terms_, false);
  ++step_;
}

std::vector<double> ExpKernelConvolution::nodes(std::size_t step) const {
  std::vector<double> x, w;
  interval_rule(static_cast<double>(step) * h_, h_, step == 0, x, w);
  return x;
}

void ExpKernelConvolution::step_exact(const std::function<double(double)>& y) {
  const auto x = nodes(step_);
  std::vector<double> vals(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) vals[k] = y(x[k]);
  step_nodes(vals);
}

void ExpKernelConvolution::step_nodes(const std::vector<double>& y_at_nodes) {
  std::vector<double> x, w;
  const double t0 = static_cast<double>(step_) * h_;
  interval_rule(t0, h_, step_ == 0, x, w);
  if (y_at_nodes.size() != x.size()) throw InputError("node value count mismatch");
  propagate();
  const double t1 = t0 + h_;
  for (auto& t : terms_) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (y_at_nodes[k] == 0.0) continue;
      const double u = t1 - x[k];
      const cplx e = std::exp(-t.rate * u) * (w[k] * y_at_nodes[k]);
      double pw = 1.0;
      for (std::size_t l = 0; l < t.next.size(); ++l) {
        t.next[l] += pw * e;
        pw *= u;
      }
    }
    t.s = t.next;
  }
  value_ = combine(terms_, false);
  ++step_;
}

}  // namespace mrpchan
