#pragma once

#include "lmcf/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace lmcf {

// Sparse real polynomial in nvars variables; exponents keyed by multi-index.
class Polynomial {
 public:
  using Monomial = std::vector<int>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int i);
  // Restriction of the linear functional x -> a . x.
  static Polynomial linear(const VecX& a);

  int nvars() const { return nvars_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  void add_term(const Monomial& m, double c);
  double coefficient(const Monomial& m) const;

  int degree() const;  // -1 for the zero polynomial
  bool is_zero() const { return terms_.empty(); }
  double eval(const VecX& x) const;
  Polynomial derivative(int i) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double c) const;
  bool operator==(const Polynomial& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

  std::string to_string() const;

 private:
  int nvars_ = 0;
  std::map<Monomial, double> terms_;  // no zero coefficients stored
};

inline Polynomial operator*(double c, const Polynomial& p) { return p * c; }

}  // namespace lmcf
