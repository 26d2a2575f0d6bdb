#pragma once

// Truncated multivariate Taylor series ("jets") in a fixed number of seed
// variables. Arithmetic is closed under truncation at the jet order, so a
// function written generically over its scalar type yields its Taylor
// polynomial when evaluated on seeded jets.

#include <functional>
#include <span>
#include <vector>

#include "ahmpc/poly.hpp"

namespace ahmpc {

template <typename T>
class BasicJet {
 public:
  using Series = BasicPolyBundle<T>;

  BasicJet(int num_vars, int order);
  // `series` must start at degree 0; its top degree becomes the order.
  explicit BasicJet(Series series);

  static BasicJet constant(int num_vars, int order, T c);
  // Seed variable i expanded about `value`: value + dx_i.
  static BasicJet variable(int num_vars, int order, int i, T value);

  int num_vars() const { return series_.num_vars(); }
  int order() const { return series_.max_degree(); }
  T value() const { return series_.term(0).coeffs()[0]; }
  const Series& series() const { return series_; }

  // this += c * x
  void add_scaled(T c, const BasicJet& x);

  BasicJet& operator+=(const BasicJet& o);
  BasicJet& operator-=(const BasicJet& o);
  BasicJet& operator*=(const BasicJet& o);
  BasicJet& operator/=(const BasicJet& o);
  BasicJet& operator+=(T c);
  BasicJet& operator-=(T c);
  BasicJet& operator*=(T c);
  BasicJet& operator/=(T c);

  friend BasicJet operator+(BasicJet a, const BasicJet& b) { return a += b; }
  friend BasicJet operator-(BasicJet a, const BasicJet& b) { return a -= b; }
  friend BasicJet operator*(BasicJet a, const BasicJet& b) { return a *= b; }
  friend BasicJet operator/(BasicJet a, const BasicJet& b) { return a /= b; }
  friend BasicJet operator+(BasicJet a, T c) { return a += c; }
  friend BasicJet operator+(T c, BasicJet a) { return a += c; }
  friend BasicJet operator-(BasicJet a, T c) { return a -= c; }
  friend BasicJet operator-(T c, const BasicJet& a) { return -a + c; }
  friend BasicJet operator*(BasicJet a, T c) { return a *= c; }
  friend BasicJet operator*(T c, BasicJet a) { return a *= c; }
  friend BasicJet operator/(BasicJet a, T c) { return a /= c; }
  friend BasicJet operator/(T c, const BasicJet& a) {
    return a.reciprocal() * c;
  }
  friend BasicJet operator-(BasicJet a) { return a *= T(-1); }

  friend BasicJet sin(const BasicJet& a) { return a.sin_impl(); }
  friend BasicJet cos(const BasicJet& a) { return a.cos_impl(); }

 private:
  void check_compatible(const BasicJet& o) const;
  // The jet minus its constant term.
  BasicJet nilpotent_part() const;
  // 1 / a as a truncated geometric series; a(0) must be nonzero.
  BasicJet reciprocal() const;
  BasicJet sin_impl() const;
  BasicJet cos_impl() const;

  Series series_;
};

using Jet = BasicJet<double>;

using JetFunction = std::function<Jet(std::span<const Jet>)>;

// Taylor expansion of `f` about `point` through degree d, returned in the
// deviation variables dx = x - point (degrees 0..d).
PolyBundle jet_lift(const JetFunction& f, std::span<const double> point, int d);

// Evaluates polynomials at jet arguments, caching the monomial products of
// the arguments. Used for truncated polynomial composition p(g(x)).
template <typename T>
class BasicJetSubstitution {
 public:
  BasicJetSubstitution(std::vector<BasicJet<T>> args, int max_degree);

  BasicJet<T> apply(const BasicPolyBundle<T>& p) const;
  const std::vector<BasicJet<T>>& args() const { return args_; }

 private:
  std::vector<BasicJet<T>> args_;
  int max_degree_;
  int num_vars_;
  int order_;
  bool nilpotent_args_;
  // monomials_[k][i] is the product of args for basis(args, k)[i]; empty
  // vectors stand for degrees that truncate to zero.
  std::vector<std::vector<BasicJet<T>>> monomials_;
};

using JetSubstitution = BasicJetSubstitution<double>;

}  // namespace ahmpc
