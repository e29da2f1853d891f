#include "mrpchan/exp_poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mrpchan/error.hpp"

namespace mrpchan {

namespace {

double factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> f(171, 1.0);
    for (int i = 1; i < 171; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  if (n < 0 || n > 170) throw CapabilityError("factorial argument out of range");
  return table[static_cast<std::size_t>(n)];
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

cplx ipow(cplx z, int n) {
  cplx r(1.0, 0.0);
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

double term_value(const ExpTerm& term, double t) {
  const double tp = term.power == 0 ? 1.0 : std::pow(t, term.power);
  if (term.rate.imag() == 0.0 && term.coeff.imag() == 0.0)
    return term.coeff.real() * tp * std::exp(-term.rate.real() * t);
  return (term.coeff * std::exp(-term.rate * t)).real() * tp;
}

void check_power(int p) {
  if (p > kMaxPower)
    throw CapabilityError("exponential polynomial power exceeds supported maximum (" +
                          std::to_string(kMaxPower) + ")");
}

}  // namespace

bool rates_equal(cplx a, cplx b) noexcept {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return true;
  return std::abs(a - b) <= kRateMergeTol * scale;
}

ExpPoly::ExpPoly(std::vector<ExpTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.power < 0) throw InputError("negative power in exponential polynomial");
    if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag()) ||
        !std::isfinite(t.rate.real()) || !std::isfinite(t.rate.imag()))
      throw InputError("non-finite exponential polynomial term");
    if (t.rate.real() < 0.0) throw InputError("exponential polynomial term with growing rate");
    check_power(t.power);
  }
  normalize();
}

ExpPoly ExpPoly::exponential(double rate) { return exponential(rate, rate); }

ExpPoly ExpPoly::exponential(double rate, double weight) {
  if (!(rate > 0.0)) throw InputError("exponential rate must be positive");
  return ExpPoly({ExpTerm{weight, 0, rate}});
}

ExpPoly ExpPoly::erlang(int shape, double rate) {
  if (shape < 1 || !(rate > 0.0)) throw InputError("invalid Erlang parameters");
  return ExpPoly({ExpTerm{std::pow(rate, shape) / factorial(shape - 1), shape - 1, rate}});
}

ExpPoly ExpPoly::constant(double c) { return ExpPoly({ExpTerm{c, 0, 0.0}}); }

void ExpPoly::normalize() {
  std::vector<ExpTerm> merged;
  merged.reserve(terms_.size());
  for (const auto& t : terms_) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const ExpTerm& m) {
      return m.power == t.power && rates_equal(m.rate, t.rate);
    });
    if (it == merged.end())
      merged.push_back(t);
    else
      it->coeff += t.coeff;
  }
  std::erase_if(merged, [](const ExpTerm& t) { return t.coeff == cplx(0.0, 0.0); });
  std::sort(merged.begin(), merged.end(), [](const ExpTerm& a, const ExpTerm& b) {
    if (a.rate.real() != b.rate.real()) return a.rate.real() < b.rate.real();
    if (a.rate.imag() != b.rate.imag()) return a.rate.imag() < b.rate.imag();
    return a.power < b.power;
  });
  terms_ = std::move(merged);
}

double ExpPoly::operator()(double t) const {
  double v = 0.0;
  for (const auto& term : terms_) v += term_value(term, t);
  return v;
}

double ExpPoly::rounding_bound(double t) const {
  double b = 0.0;
  for (const auto& term : terms_)
    b += std::abs(term.coeff) * std::pow(t, term.power) * std::exp(-term.rate.real() * t);
  return 64.0 * std::numeric_limits<double>::epsilon() * b;
}

double ExpPoly::log_value(double t) const {
  if (terms_.empty()) return -std::numeric_limits<double>::infinity();
  const double a = slowest_decay();
  double v = 0.0;
  for (const auto& term : terms_) {
    ExpTerm shifted = term;
    shifted.rate -= a;
    v += term_value(shifted, t);
  }
  if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(v) - a * t;
}

double ExpPoly::mass() const {
  cplx m = 0.0;
  for (const auto& t : terms_) {
    if (t.rate == cplx(0.0, 0.0)) throw CapabilityError("mass of a non-decaying term is infinite");
    m += t.coeff * factorial(t.power) / ipow(t.rate, t.power + 1);
  }
  return m.real();
}

double ExpPoly::cumulative(double t) const {
  if (t <= 0.0) return 0.0;
  cplx acc = 0.0;
  for (const auto& term : terms_) {
    const int m = term.power;
    if (term.rate == cplx(0.0, 0.0)) {
      acc += term.coeff * std::pow(t, m + 1) / static_cast<double>(m + 1);
      continue;
    }
    const cplx rho = term.rate;
    const cplx total = factorial(m) / ipow(rho, m + 1);
    cplx tail = 0.0;
    for (int k = 0; k <= m; ++k)
      tail += factorial(m) / factorial(k) * std::pow(t, k) / ipow(rho, m - k + 1);
    tail *= std::exp(-rho * t);
    acc += term.coeff * (total - tail);
  }
  return acc.real();
}

double ExpPoly::first_moment() const {
  cplx m = 0.0;
  for (const auto& t : terms_) {
    if (t.rate == cplx(0.0, 0.0)) throw CapabilityError("moment of a non-decaying term is infinite");
    m += t.coeff * factorial(t.power + 1) / ipow(t.rate, t.power + 2);
  }
  return m.real();
}

ExpPoly ExpPoly::tail() const {
  std::vector<ExpTerm> out;
  for (const auto& t : terms_) {
    if (t.rate == cplx(0.0, 0.0)) throw CapabilityError("tail of a non-decaying term is infinite");
    for (int k = 0; k <= t.power; ++k)
      out.push_back({t.coeff * factorial(t.power) / factorial(k) / ipow(t.rate, t.power - k + 1), k,
                     t.rate});
  }
  return ExpPoly(std::move(out));
}

ExpPoly ExpPoly::antiderivative() const {
  std::vector<ExpTerm> out;
  cplx constant = 0.0;
  for (const auto& t : terms_) {
    if (t.rate == cplx(0.0, 0.0)) {
      check_power(t.power + 1);
      out.push_back({t.coeff / static_cast<double>(t.power + 1), t.power + 1, 0.0});
      continue;
    }
    constant += t.coeff * factorial(t.power) / ipow(t.rate, t.power + 1);
    for (int k = 0; k <= t.power; ++k)
      out.push_back({-t.coeff * factorial(t.power) / factorial(k) / ipow(t.rate, t.power - k + 1), k,
                     t.rate});
  }
  out.push_back({constant, 0, 0.0});
  return ExpPoly(std::move(out));
}

ExpPoly ExpPoly::derivative() const {
  std::vector<ExpTerm> out;
  for (const auto& t : terms_) {
    if (t.power > 0) out.push_back({t.coeff * static_cast<double>(t.power), t.power - 1, t.rate});
    out.push_back({-t.coeff * t.rate, t.power, t.rate});
  }
  return ExpPoly(std::move(out));
}

cplx ExpPoly::laplace(cplx s) const {
  cplx v = 0.0;
  for (const auto& t : terms_) v += t.coeff * factorial(t.power) / ipow(s + t.rate, t.power + 1);
  return v;
}

double ExpPoly::slowest_decay() const {
  double a = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) a = std::min(a, t.rate.real());
  return a;
}

double ExpPoly::fastest_rate() const {
  double a = 0.0;
  for (const auto& t : terms_) a = std::max(a, std::abs(t.rate));
  return a;
}

bool ExpPoly::all_rates_positive() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const ExpTerm& t) { return t.rate.real() > 0.0; });
}

bool ExpPoly::is_single_exponential() const {
  return terms_.size() == 1 && terms_[0].power == 0 && terms_[0].rate.imag() == 0.0 &&
         terms_[0].coeff.imag() == 0.0;
}

ExpPoly ExpPoly::operator+(const ExpPoly& o) const {
  std::vector<ExpTerm> out = terms_;
  out.insert(out.end(), o.terms_.begin(), o.terms_.end());
  return ExpPoly(std::move(out));
}

ExpPoly ExpPoly::operator-(const ExpPoly& o) const { return *this + o * -1.0; }

ExpPoly ExpPoly::operator*(double s) const {
  std::vector<ExpTerm> out = terms_;
  for (auto& t : out) t.coeff *= s;
  return ExpPoly(std::move(out));
}

ExpPoly& ExpPoly::operator+=(const ExpPoly& o) {
  *this = *this + o;
  return *this;
}

ExpPoly ExpPoly::times(const ExpPoly& o) const {
  std::vector<ExpTerm> out;
  out.reserve(terms_.size() * o.terms_.size());
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) {
      check_power(a.power + b.power);
      out.push_back({a.coeff * b.coeff, a.power + b.power, a.rate + b.rate});
    }
  return ExpPoly(std::move(out));
}

ExpPoly ExpPoly::convolve(const ExpPoly& o) const {
  std::vector<ExpTerm> out;
  for (const auto& x : terms_)
    for (const auto& y : o.terms_) {
      const cplx k = x.coeff * y.coeff * factorial(x.power) * factorial(y.power);
      if (rates_equal(x.rate, y.rate)) {
        const int p = x.power + y.power + 1;
        check_power(p);
        out.push_back({k / factorial(p), p, x.rate});
        continue;
      }
      // Partial fractions of (s+r1)^-a (s+r2)^-b.
      const int a = x.power + 1;
      const int b = y.power + 1;
      const cplx d12 = y.rate - x.rate;
      for (int j = 0; j < a; ++j) {
        const cplx coef = (j % 2 ? -1.0 : 1.0) * binomial(b + j - 1, j) / ipow(d12, b + j);
        out.push_back({k * coef / factorial(a - j - 1), a - j - 1, x.rate});
      }
      for (int j = 0; j < b; ++j) {
        const cplx coef = (j % 2 ? -1.0 : 1.0) * binomial(a + j - 1, j) / ipow(-d12, a + j);
        out.push_back({k * coef / factorial(b - j - 1), b - j - 1, y.rate});
      }
    }
  return ExpPoly(std::move(out));
}

std::string ExpPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(10);
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    if (t.coeff.imag() == 0.0)
      os << t.coeff.real();
    else
      os << "(" << t.coeff.real() << (t.coeff.imag() < 0 ? "" : "+") << t.coeff.imag() << "i)";
    if (t.power > 0) os << "*t^" << t.power;
    if (t.rate != cplx(0.0, 0.0)) {
      os << "*exp(-";
      if (t.rate.imag() == 0.0)
        os << t.rate.real();
      else
        os << "(" << t.rate.real() << (t.rate.imag() < 0 ? "" : "+") << t.rate.imag() << "i)";
      os << "t)";
    }
  }
  return os.str();
}

ExpPoly sum(std::span<const ExpPoly> fs) {
  std::vector<ExpTerm> out;
  for (const auto& f : fs) out.insert(out.end(), f.terms().begin(), f.terms().end());
  return ExpPoly(std::move(out));
}

}  // namespace mrpchan
