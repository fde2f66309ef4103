#include "lmcf/polynomial.hpp"

#include "lmcf/error.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace lmcf {

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(Monomial(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
  Polynomial p(nvars);
  Monomial m(nvars, 0);
  m.at(i) = 1;
  p.add_term(m, 1.0);
  return p;
}

Polynomial Polynomial::linear(const VecX& a) {
  const int n = static_cast<int>(a.size());
  Polynomial p(n);
  for (int i = 0; i < n; ++i) {
    Monomial m(n, 0);
    m[i] = 1;
    p.add_term(m, a[i]);
  }
  return p;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (static_cast<int>(m.size()) != nvars_)
    throw Error(ErrorCode::InvalidArgument, "monomial arity does not match the polynomial");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [m, c] : terms_) d = std::max(d, std::accumulate(m.begin(), m.end(), 0));
  return d;
}

double Polynomial::eval(const VecX& x) const {
  double s = 0.0;
  for (const auto& [m, c] : terms_) {
    double v = c;
    for (int i = 0; i < nvars_; ++i)
      for (int e = 0; e < m[i]; ++e) v *= x[i];
    s += v;
  }
  return s;
}

Polynomial Polynomial::derivative(int i) const {
  Polynomial d(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[i] == 0) continue;
    Monomial mm = m;
    mm[i] -= 1;
    d.add_term(mm, c * m[i]);
  }
  return d;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (o.nvars_ != nvars_) throw Error(ErrorCode::InvalidArgument, "arity mismatch");
  Polynomial r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.nvars_ != nvars_) throw Error(ErrorCode::InvalidArgument, "arity mismatch");
  Polynomial r(nvars_);
  for (const auto& [a, ca] : terms_)
    for (const auto& [b, cb] : o.terms_) {
      Monomial m(nvars_);
      for (int i = 0; i < nvars_; ++i) m[i] = a[i] + b[i];
      r.add_term(m, ca * cb);
    }
  return r;
}

Polynomial Polynomial::operator*(double c) const {
  Polynomial r(nvars_);
  for (const auto& [m, v] : terms_) r.add_term(m, v * c);
  return r;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    if (!first) out << (c < 0 ? " - " : " + ");
    else if (c < 0) out << "-";
    first = false;
    const double a = std::abs(c);
    const bool unit = std::all_of(m.begin(), m.end(), [](int e) { return e == 0; });
    if (a != 1.0 || unit) out << a;
    for (int i = 0; i < nvars_; ++i) {
      if (m[i] == 0) continue;
      out << "x" << (i + 1);
      if (m[i] > 1) out << "^" << m[i];
    }
  }
  return out.str();
}

}  // namespace lmcf
