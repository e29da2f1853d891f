#include "mrpchan/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/Polynomials>

#include "mrpchan/error.hpp"

namespace mrpchan {

Poly::Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  strip();
  if (degree() > kMaxDegree) throw CapabilityError("polynomial degree exceeds cap");
}

void Poly::strip() {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

Poly Poly::from_roots(const std::vector<Root>& roots) {
  std::vector<cplx> p{1.0};
  for (const auto& r : roots)
    for (int k = 0; k < r.multiplicity; ++k) {
      std::vector<cplx> q(p.size() + 1, 0.0);
      for (std::size_t i = 0; i < p.size(); ++i) {
        q[i + 1] += p[i];
        q[i] -= r.value * p[i];
      }
      p = std::move(q);
    }
  std::vector<double> c(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = p[i].real();
  return Poly(std::move(c));
}

double Poly::operator()(double s) const {
  double v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * s + *it;
  return v;
}

cplx Poly::operator()(cplx s) const {
  cplx v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * s + *it;
  return v;
}

double Poly::magnitude(cplx s) const {
  const double a = std::abs(s);
  double v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * a + std::abs(*it);
  return v;
}

Poly Poly::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<double> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<double>(k);
  return Poly(std::move(d));
}

Poly Poly::operator+(const Poly& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Poly(std::move(r));
}

Poly Poly::operator-(const Poly& o) const { return *this + o * -1.0; }

Poly Poly::operator*(const Poly& o) const {
  if (is_zero() || o.is_zero()) return {};
  std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Poly(std::move(r));
}

Poly Poly::operator*(double s) const {
  std::vector<double> r = c_;
  for (auto& x : r) x *= s;
  return Poly(std::move(r));
}

Poly Poly::trimmed(double rel) const {
  if (is_zero()) return {};
  double m = 0.0;
  for (double x : c_) m = std::max(m, std::abs(x));
  std::vector<double> r = c_;
  while (!r.empty() && std::abs(r.back()) <= rel * m) r.pop_back();
  return Poly(std::move(r));
}

std::vector<Root> Poly::roots() const {
  if (degree() < 1) return {};
  // Exact zero roots are split off first; the companion solver smears them.
  std::size_t lead_zeros = 0;
  while (lead_zeros < c_.size() && c_[lead_zeros] == 0.0) ++lead_zeros;
  std::vector<cplx> raw(lead_zeros, 0.0);
  const Eigen::Index n = static_cast<Eigen::Index>(c_.size() - lead_zeros);
  if (n >= 2) {
    Eigen::VectorXd coeffs(n);
    for (Eigen::Index i = 0; i < n; ++i) coeffs[i] = c_[lead_zeros + static_cast<std::size_t>(i)];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeffs);
    for (const auto& r : solver.roots()) raw.push_back(r);
  }

  double scale = 0.0;
  for (const auto& r : raw) scale = std::max(scale, std::abs(r));
  const double floor = 1e-10 * scale;

  std::vector<std::vector<cplx>> clusters;
  for (const auto& r : raw) {
    bool placed = false;
    for (auto& cl : clusters) {
      const cplx& a = cl.front();
      if (std::abs(a - r) <= std::max(kRootClusterTol * std::max(std::abs(a), std::abs(r)), floor)) {
        cl.push_back(r);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({r});
  }

  const Poly dp = derivative();
  std::vector<Root> out;
  for (const auto& cl : clusters) {
    cplx mean = 0.0;
    for (const auto& r : cl) mean += r;
    mean /= static_cast<double>(cl.size());
    if (cl.size() == 1) {
      const cplx d = dp(mean);
      if (std::abs(d) > 0.0) {
        const cplx cand = mean - (*this)(mean) / d;
        if (std::abs((*this)(cand)) <= std::abs((*this)(mean))) mean = cand;
      }
    }
    if (std::abs(mean) <= floor) mean = 0.0;
    if (std::abs(mean.imag()) <= 1e-9 * std::abs(mean)) mean = {mean.real(), 0.0};
    out.push_back({mean, static_cast<int>(cl.size())});
  }

  // Enforce exact conjugate symmetry.
  std::vector<Root> upper, lower, real;
  for (const auto& r : out) (r.value.imag() > 0 ? upper : r.value.imag() < 0 ? lower : real).push_back(r);
  if (upper.size() == lower.size()) {
    std::vector<Root> sym = real;
    for (const auto& u : upper) {
      sym.push_back(u);
      sym.push_back({std::conj(u.value), u.multiplicity});
    }
    out = std::move(sym);
  }
  std::sort(out.begin(), out.end(), [](const Root& a, const Root& b) {
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() < b.value.imag();
  });
  return out;
}

std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw InputError("polynomial division by zero");
  if (a.degree() < b.degree()) return {Poly{}, a};
  std::vector<double> rem = a.coeffs();
  const int db = b.degree();
  std::vector<double> q(static_cast<std::size_t>(a.degree() - db + 1), 0.0);
  for (int k = a.degree() - db; k >= 0; --k) {
    const double f = rem[static_cast<std::size_t>(k + db)] / b.leading();
    q[static_cast<std::size_t>(k)] = f;
    for (int j = 0; j <= db; ++j) rem[static_cast<std::size_t>(k + j)] -= f * b[j];
    rem[static_cast<std::size_t>(k + db)] = 0.0;
  }
  rem.resize(static_cast<std::size_t>(db));
  return {Poly(std::move(q)), Poly(std::move(rem))};
}

}  // namespace mrpchan
