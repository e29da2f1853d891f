#include "mrpchan/rational.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <unordered_map>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mrpchan/error.hpp"
#include "mrpchan/log.hpp"

namespace mrpchan {

namespace {

using CPoly = std::vector<cplx>;

CPoly cmul(const CPoly& a, const CPoly& b) {
  CPoly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

CPoly cpow_linear(cplx a, int n) {
  CPoly p{1.0};
  for (int k = 0; k < n; ++k) p = cmul(p, {a, 1.0});
  return p;
}

/// Taylor coefficients of p around x, orders 0..n-1.
CPoly taylor(CPoly p, cplx x, int n) {
  CPoly out;
  for (int k = 0; k < n; ++k) {
    if (p.empty()) {
      out.push_back(0.0);
      continue;
    }
    // Synthetic division by (s - x): p = (s - x) q + p(x).
    CPoly q(p.size() > 1 ? p.size() - 1 : 0, 0.0);
    cplx acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) {
      acc = acc * x + p[i];
      if (i > 0) q[i - 1] = acc;
    }
    out.push_back(acc);
    p = std::move(q);
  }
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Poly divide_root(const Poly& p, cplx root) {
  if (root.imag() == 0.0) return divmod(p, Poly::linear(-root.real())).first;
  const Poly quad({std::norm(root), -2.0 * root.real(), 1.0});
  return divmod(p, quad).first;
}

bool same_pole(cplx a, cplx b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= kRootClusterTol * scale;
}

std::vector<Root>::const_iterator find_pole(const std::vector<Root>& ps, cplx v) {
  return std::find_if(ps.begin(), ps.end(), [&](const Root& r) { return same_pole(r.value, v); });
}

int multiplicity_in(const std::vector<Root>& ps, cplx v) {
  const auto it = find_pole(ps, v);
  return it == ps.end() ? 0 : it->multiplicity;
}

/// Least common multiple (max multiplicities) or product (summed multiplicities).
std::vector<Root> merge_poles(const std::vector<Root>& a, const std::vector<Root>& b, bool sum) {
  std::vector<Root> out = a;
  for (const auto& r : b) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Root& x) { return same_pole(x.value, r.value); });
    if (it == out.end())
      out.push_back(r);
    else
      it->multiplicity = sum ? it->multiplicity + r.multiplicity : std::max(it->multiplicity, r.multiplicity);
  }
  return out;
}

/// Poles of `all` not accounted for by `part`.
std::vector<Root> pole_complement(const std::vector<Root>& all, const std::vector<Root>& part) {
  std::vector<Root> out;
  for (const auto& r : all) {
    const int m = r.multiplicity - multiplicity_in(part, r.value);
    if (m > 0) out.push_back({r.value, m});
  }
  return out;
}

bool vanishes_at(const Poly& p, cplx x) { return std::abs(p(x)) <= kCancelTol * p.magnitude(x); }

}  // namespace

RationalLT::RationalLT(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw InputError("rational function with zero denominator");
  const double lead = den_.leading();
  if (lead != 1.0) {
    num_ = num_ * (1.0 / lead);
    den_ = den_ * (1.0 / lead);
  }
  if (num_.is_zero()) {
    den_ = Poly::constant(1.0);
    return;
  }
  if (den_.degree() > 0) poles_ = den_.roots();
}

RationalLT::RationalLT(Poly num, std::vector<Root> poles) : num_(std::move(num)), poles_(std::move(poles)) {
  if (num_.is_zero()) poles_.clear();
  den_ = Poly::from_roots(poles_);
}

RationalLT RationalLT::operator+(const RationalLT& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  std::vector<Root> l = merge_poles(poles_, o.poles_, false);
  const Poly n = num_ * Poly::from_roots(pole_complement(l, poles_)) + o.num_ * Poly::from_roots(pole_complement(l, o.poles_));
  return RationalLT(n, std::move(l)).reduced();
}

RationalLT RationalLT::operator-(const RationalLT& o) const { return *this + o * -1.0; }

RationalLT RationalLT::operator*(const RationalLT& o) const {
  if (is_zero() || o.is_zero()) return zero();
  return RationalLT(num_ * o.num_, merge_poles(poles_, o.poles_, true)).reduced();
}

RationalLT RationalLT::operator/(const RationalLT& o) const {
  if (o.is_zero()) throw NumericError("division by zero rational function");
  if (is_zero()) return zero();
  const double lead = o.num_.leading();
  std::vector<Root> zs = o.num_.degree() > 0 ? o.num_.roots() : std::vector<Root>{};
  return RationalLT(num_ * o.den_ * (1.0 / lead), merge_poles(poles_, zs, true)).reduced();
}

RationalLT RationalLT::operator*(double s) const {
  if (s == 0.0) return zero();
  RationalLT r = *this;
  r.num_ = r.num_ * s;
  return r;
}

RationalLT RationalLT::reduced() const {
  if (num_.is_zero()) return zero();
  if (poles_.empty() || num_.degree() == 0) return *this;
  Poly n = num_;
  std::vector<Root> ps = poles_;
  for (auto& r : ps) {
    if (r.value.imag() < 0.0) continue;  // handled with its conjugate
    auto conj = std::find_if(ps.begin(), ps.end(), [&](const Root& x) {
      return x.value.imag() < 0.0 && same_pole(x.value, std::conj(r.value));
    });
    while (r.multiplicity > 0 && n.degree() >= (r.value.imag() == 0.0 ? 1 : 2) && vanishes_at(n, r.value)) {
      n = divide_root(n, r.value);
      --r.multiplicity;
      if (r.value.imag() != 0.0 && conj != ps.end()) --conj->multiplicity;
    }
  }
  std::erase_if(ps, [](const Root& r) { return r.multiplicity <= 0; });
  return RationalLT(n, std::move(ps));
}

std::string RationalLT::to_string() const {
  std::ostringstream os;
  os.precision(12);
  auto print = [&](const Poly& p) {
    os << "(";
    for (int k = 0; k <= p.degree(); ++k) os << (k ? " + " : "") << p[k] << "*s^" << k;
    if (p.is_zero()) os << "0";
    os << ")";
  };
  print(num_);
  os << "/";
  print(den_);
  return os.str();
}

RationalLT lt_of(const ExpPoly& d) {
  if (d.is_zero()) return RationalLT::zero();
  struct Group {
    cplx rate;
    int max_power = 0;
  };
  std::vector<Group> groups;
  for (const auto& t : d.terms()) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return rates_equal(g.rate, t.rate); });
    if (it == groups.end())
      groups.push_back({t.rate, t.power});
    else
      it->max_power = std::max(it->max_power, t.power);
  }
  CPoly den{1.0};
  for (const auto& g : groups) den = cmul(den, cpow_linear(g.rate, g.max_power + 1));
  CPoly num(den.size(), 0.0);
  for (const auto& t : d.terms()) {
    CPoly part{t.coeff * factorial(t.power)};
    for (const auto& g : groups) {
      const int e = rates_equal(g.rate, t.rate) ? g.max_power - t.power : g.max_power + 1;
      part = cmul(part, cpow_linear(g.rate, e));
    }
    for (std::size_t i = 0; i < part.size(); ++i) num[i] += part[i];
  }
  std::vector<double> nr(num.size());
  for (std::size_t i = 0; i < num.size(); ++i) nr[i] = num[i].real();
  std::vector<Root> poles;
  for (const auto& g : groups) poles.push_back({-g.rate, g.max_power + 1});
  return RationalLT(Poly(nr), std::move(poles)).reduced();
}

Inversion invert_lt_checked(const RationalLT& r, bool allow_zero_pole) {
  Inversion out;
  if (r.is_zero()) return out;
  Poly num = r.num();
  const Poly& den = r.den();
  if (num.degree() >= den.degree()) {
    double m = 0.0;
    for (double c : num.coeffs()) m = std::max(m, std::abs(c));
    std::vector<double> c = num.coeffs();
    while (static_cast<int>(c.size()) > den.degree() && std::abs(c.back()) <= 1e-12 * m) c.pop_back();
    if (static_cast<int>(c.size()) > den.degree())
      throw InputError("inverse transform requires a strictly proper rational function: " + r.to_string());
    num = Poly(c);
  }

  const auto& roots = r.poles();
  double scale = 0.0;
  for (const auto& p : roots) scale = std::max(scale, std::abs(p.value));
  if (roots.size() > 1 && scale > 0.0) {
    double sep = 1.0;
    for (std::size_t i = 0; i < roots.size(); ++i)
      for (std::size_t j = i + 1; j < roots.size(); ++j) sep *= std::abs(roots[j].value - roots[i].value) / scale;
    out.separation = sep;
    if (sep < kConditioningTol) {
      out.ill_conditioned = true;
      logger().warn("inverse transform: poles nearly coincide (separation {:.3e})", sep);
    }
  }

  CPoly ncoef(num.coeffs().begin(), num.coeffs().end());
  struct Part {
    cplx pole;
    CPoly h;
    bool unstable;
  };
  std::vector<Part> parts;
  double ref = 0.0;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const cplx p = roots[i].value;
    const int m = roots[i].multiplicity;
    // Local expansion of prod_{j != i} (s - r_j)^m_j in powers of (s - p), factor by factor.
    CPoly gt(static_cast<std::size_t>(m), 0.0);
    gt[0] = 1.0;
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j == i) continue;
      gt = cmul(gt, cpow_linear(p - roots[j].value, roots[j].multiplicity));
      gt.resize(static_cast<std::size_t>(m));
    }
    const CPoly nt = taylor(ncoef, p, m);
    CPoly h(static_cast<std::size_t>(m), 0.0);
    for (int k = 0; k < m; ++k) {
      cplx acc = nt[static_cast<std::size_t>(k)];
      for (int j = 1; j <= k; ++j) acc -= gt[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(k - j)];
      h[static_cast<std::size_t>(k)] = acc / gt[0];
      ref = std::max(ref, std::abs(h[static_cast<std::size_t>(k)]));
    }
    const bool zero_pole = p == cplx(0.0, 0.0);
    const bool unstable = zero_pole ? !allow_zero_pole || m > 1 : p.real() >= 0.0;
    parts.push_back({p, std::move(h), unstable});
  }
  std::vector<ExpTerm> terms;
  for (const auto& part : parts) {
    const int m = static_cast<int>(part.h.size());
    if (part.unstable) {
      double hmax = 0.0;
      for (const auto& x : part.h) hmax = std::max(hmax, std::abs(x));
      if (hmax > 1e-10 * ref) {
        std::ostringstream os;
        os << "transform has a pole at s = " << part.pole << " with nonzero residue";
        throw UnstableDensityError(os.str());
      }
      continue;
    }
    for (int k = 0; k < m; ++k)
      terms.push_back({part.h[static_cast<std::size_t>(k)] / factorial(m - k - 1), m - k - 1, -part.pole});
  }
  out.f = ExpPoly(std::move(terms));
  return out;
}

ExpPoly invert_lt(const RationalLT& r, bool allow_zero_pole) { return invert_lt_checked(r, allow_zero_pole).f; }

Eigen::MatrixXd evaluate(const RationalMatrix& m, double s) {
  const Eigen::Index n = static_cast<Eigen::Index>(m.size());
  const Eigen::Index k = n ? static_cast<Eigen::Index>(m[0].size()) : 0;
  Eigen::MatrixXd v(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) v(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](s);
  return v;
}

namespace {

/// Determinants of minors of a polynomial matrix, memoised on (row set, column set).
class MinorDeterminants {
 public:
  explicit MinorDeterminants(const std::vector<std::vector<Poly>>& m) : m_(m) {}

  Poly operator()(std::uint32_t rows, std::uint32_t cols) {
    if (rows == 0) return Poly::constant(1.0);
    const std::uint64_t key = (static_cast<std::uint64_t>(rows) << 32) | cols;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const int r = std::countr_zero(rows);
    Poly acc;
    int sign = 1;
    for (std::uint32_t c = 0; c < m_.size(); ++c) {
      if (!(cols & (1u << c))) continue;
      const Poly& e = m_[static_cast<std::size_t>(r)][c];
      if (!e.is_zero()) {
        const Poly sub = (*this)(rows & ~(1u << r), cols & ~(1u << c));
        acc = acc + e * sub * static_cast<double>(sign);
      }
      sign = -sign;
    }
    memo_.emplace(key, acc);
    return acc;
  }

 private:
  const std::vector<std::vector<Poly>>& m_;
  std::unordered_map<std::uint64_t, Poly> memo_;
};

}  // namespace

RationalMatrix inverse_identity_minus(const RationalMatrix& d) {
  const std::size_t n = d.size();
  if (n == 0) return {};
  if (n > 20) throw CapabilityError("matrix inverse limited to 20 hidden states");
  std::vector<Root> l;
  for (const auto& row : d) {
    if (row.size() != n) throw InputError("matrix must be square");
    for (const auto& e : row) l = merge_poles(l, e.poles(), false);
  }
  const Poly lp = Poly::from_roots(l);
  std::vector<std::vector<Poly>> m(n, std::vector<Poly>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Poly e = d[i][j].is_zero() ? Poly() : d[i][j].num() * Poly::from_roots(pole_complement(l, d[i][j].poles())) * -1.0;
      m[i][j] = i == j ? lp + e : e;
    }
  MinorDeterminants minors(m);
  const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1u;
  Poly det = minors(all, all);
  if (det.is_zero()) throw NumericError("I - D is singular");
  // Deflate the known poles of L first so that only the new poles are root-found.
  std::vector<Root> poles;
  for (const auto& r : l) {
    if (r.value.imag() < 0.0) continue;
    int k = 0;
    while (k < r.multiplicity * static_cast<int>(n) && det.degree() >= (r.value.imag() == 0.0 ? 1 : 2) &&
           vanishes_at(det, r.value)) {
      det = divide_root(det, r.value);
      ++k;
    }
    if (k > 0) {
      poles.push_back({r.value, k});
      if (r.value.imag() != 0.0) poles.push_back({std::conj(r.value), k});
    }
  }
  // A singular I - D(0) (stochastic rows) has an exact pole at the origin.
  bool finite_at_zero = true;
  for (const auto& row : d)
    for (const auto& e : row)
      if (!e.is_zero() && multiplicity_in(e.poles(), 0.0) > 0) finite_at_zero = false;
  if (finite_at_zero && det.degree() > 0) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) -
                              evaluate(d, 0.0);
    const Eigen::VectorXd sv = a.jacobiSvd().singularValues();
    if (sv(sv.size() - 1) <= 1e-9 * std::max(sv(0), 1.0)) {
      det = divide_root(det, 0.0);
      poles = merge_poles(poles, {{0.0, 1}}, true);
    }
  }
  if (det.degree() > 0) poles = merge_poles(poles, det.roots(), true);
  const double lead = det.leading();
  RationalMatrix inv(n, std::vector<RationalLT>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Poly c = minors(all & ~(1u << j), all & ~(1u << i));
      if (c.is_zero()) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      inv[i][j] = RationalLT(lp * c * (sign / lead), poles).reduced();
    }
  return inv;
}

RationalMatrix neumann_series(const RationalMatrix& d) {
  if (d.empty()) return {};
  const Eigen::MatrixXd d0 = evaluate(d, 0.0);
  const double rho = d0.eigenvalues().cwiseAbs().maxCoeff();
  if (rho >= 1.0 - 1e-9)
    throw ConvergenceError("hidden block is absorbing: spectral radius of D(0) is " + std::to_string(rho));
  return inverse_identity_minus(d);
}

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.empty()) return {};
  const std::size_t n = a.size(), k = b.size(), m = k ? b[0].size() : 0;
  RationalMatrix r(n, std::vector<RationalLT>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l < k; ++l)
        if (!a[i][l].is_zero() && !b[l][j].is_zero()) r[i][j] = r[i][j] + a[i][l] * b[l][j];
  return r;
}

RationalMatrix add(const RationalMatrix& a, const RationalMatrix& b) {
  RationalMatrix r = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}

}  // namespace mrpchan
