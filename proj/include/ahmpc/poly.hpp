#pragma once

// Truncated multivariate polynomial algebra over a graded-lexicographic
// monomial order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace ahmpc {

using Exponent = std::vector<int>;

std::uint64_t binomial(int n, int k);

// Number of monomials of total degree d in n variables, C(n+d-1, d).
std::size_t monomial_count(int n, int d);

// All exponents of total degree `degree` in `num_vars` variables, sorted
// strictly decreasing in lexicographic order: (2,0), (1,1), (0,2).
class MonomialBasis {
 public:
  MonomialBasis(int num_vars, int degree);

  // Process-wide shared instance; bases are immutable.
  static std::shared_ptr<const MonomialBasis> shared(int num_vars, int degree);

  int num_vars() const { return num_vars_; }
  int degree() const { return degree_; }
  std::size_t size() const { return exponents_.size(); }
  const Exponent& operator[](std::size_t i) const { return exponents_[i]; }
  const std::vector<Exponent>& exponents() const { return exponents_; }

  // Inverse of operator[]. Throws std::invalid_argument if `e` has the wrong
  // length, a negative entry or the wrong total degree.
  std::size_t index_of(std::span<const int> e) const;

 private:
  int num_vars_;
  int degree_;
  std::vector<Exponent> exponents_;
};

MonomialBasis monomials(int num_vars, int degree);

// Rank of `e` among exponents of the same total degree; no validation.
std::size_t graded_lex_rank(std::span<const int> e, int degree);

template <typename T>
using CoeffVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Coefficients of one homogeneous degree in the graded-lex basis. T is the
// coefficient type; double everywhere except quad-precision reference runs.
template <typename T>
class BasicHomogeneousPoly {
 public:
  BasicHomogeneousPoly(int num_vars, int degree);
  BasicHomogeneousPoly(std::shared_ptr<const MonomialBasis> basis,
                       CoeffVector<T> coeffs);

  const MonomialBasis& basis() const { return *basis_; }
  const std::shared_ptr<const MonomialBasis>& basis_ptr() const {
    return basis_;
  }
  int num_vars() const { return basis_->num_vars(); }
  int degree() const { return basis_->degree(); }
  std::size_t size() const { return basis_->size(); }

  const CoeffVector<T>& coeffs() const { return coeffs_; }
  CoeffVector<T>& coeffs() { return coeffs_; }

  T coeff(std::span<const int> e) const;
  void set_coeff(std::span<const int> e, T value);

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  CoeffVector<T> coeffs_;
};

// Sum of homogeneous terms over the contiguous degree range [lo, hi].
// An empty range (hi < lo) represents the zero polynomial.
template <typename T>
class BasicPolyBundle {
 public:
  using Term = BasicHomogeneousPoly<T>;

  BasicPolyBundle() = default;
  BasicPolyBundle(int num_vars, int lo, int hi);

  static BasicPolyBundle constant(int num_vars, T c);
  static BasicPolyBundle variable(int num_vars, int i);

  int num_vars() const { return num_vars_; }
  int min_degree() const { return lo_; }
  int max_degree() const { return lo_ + static_cast<int>(terms_.size()) - 1; }
  bool empty() const { return terms_.empty(); }
  bool has_degree(int k) const { return k >= lo_ && k <= max_degree(); }

  Term& term(int k);
  const Term& term(int k) const;
  const std::vector<Term>& terms() const { return terms_; }

  // Coefficient of x^e; zero when the degree lies outside the range.
  T coeff(std::span<const int> e) const;
  // Requires the degree of `e` to lie in the range.
  void set_coeff(std::span<const int> e, T value);
  T coeff(std::initializer_list<int> e) const {
    return coeff(std::span<const int>(e.begin(), e.size()));
  }
  void set_coeff(std::initializer_list<int> e, T value) {
    set_coeff(std::span<const int>(e.begin(), e.size()), value);
  }

  // Copy restricted to [lo, hi]; missing degrees are zero-filled.
  BasicPolyBundle restricted(int lo, int hi) const;

  std::size_t coefficient_count() const;
  bool all_finite() const;

  BasicPolyBundle& operator+=(const BasicPolyBundle& other);
  BasicPolyBundle& operator-=(const BasicPolyBundle& other);
  BasicPolyBundle& operator*=(T s);

  friend BasicPolyBundle operator+(BasicPolyBundle a, const BasicPolyBundle& b) {
    return a += b;
  }
  friend BasicPolyBundle operator-(BasicPolyBundle a, const BasicPolyBundle& b) {
    return a -= b;
  }
  friend BasicPolyBundle operator*(BasicPolyBundle a, T s) { return a *= s; }
  friend BasicPolyBundle operator*(T s, BasicPolyBundle a) { return a *= s; }

 private:
  int num_vars_ = 0;
  int lo_ = 0;
  std::vector<Term> terms_;
};

// Vector-valued polynomial map, one bundle per output coordinate.
template <typename T>
struct BasicTaylorMap {
  int n_in = 0;
  int n_out = 0;
  std::vector<BasicPolyBundle<T>> rows;
};

using HomogeneousPoly = BasicHomogeneousPoly<double>;
using PolyBundle = BasicPolyBundle<double>;
using TaylorMap = BasicTaylorMap<double>;

// Coefficient-type conversion (e.g. a quad-precision series to double).
template <typename To, typename From>
BasicPolyBundle<To> poly_cast(const BasicPolyBundle<From>& p) {
  if (p.empty()) {
    return BasicPolyBundle<To>(std::max(p.num_vars(), 1), p.min_degree(),
                               p.min_degree() - 1);
  }
  BasicPolyBundle<To> out(p.num_vars(), p.min_degree(), p.max_degree());
  for (const auto& t : p.terms()) {
    out.term(t.degree()).coeffs() = t.coeffs().template cast<To>();
  }
  return out;
}

namespace detail {

template <typename Scalar, typename T>
void power_table(const BasicPolyBundle<T>& p, std::span<const Scalar> x,
                 std::vector<Scalar>& table, int& stride) {
  stride = std::max(p.max_degree(), 0) + 1;
  const int n = p.num_vars();
  table.assign(static_cast<std::size_t>(n * stride), Scalar(1));
  for (int i = 0; i < n; ++i) {
    for (int k = 1; k < stride; ++k) {
      table[i * stride + k] = table[i * stride + k - 1] * x[i];
    }
  }
}

void check_arity(int num_vars, bool empty, std::size_t n);

}  // namespace detail

template <typename Scalar, typename T>
Scalar eval(const BasicPolyBundle<T>& p, std::span<const Scalar> x) {
  detail::check_arity(p.num_vars(), p.empty(), x.size());
  if (p.empty()) return Scalar(0);
  std::vector<Scalar> pw;
  int stride = 0;
  detail::power_table(p, x, pw, stride);
  const int n = p.num_vars();
  Scalar total(0);
  for (const auto& term : p.terms()) {
    const auto& basis = term.basis();
    const auto& c = term.coeffs();
    for (std::size_t m = 0; m < basis.size(); ++m) {
      if (c[m] == 0) continue;
      Scalar mono = static_cast<Scalar>(c[m]);
      const Exponent& e = basis[m];
      for (int i = 0; i < n; ++i) mono *= pw[i * stride + e[i]];
      total += mono;
    }
  }
  return total;
}

inline double eval(const PolyBundle& p, const Eigen::VectorXd& x) {
  return eval<double>(p, std::span<const double>(x.data(), x.size()));
}

// Value plus gradient; `grad` must have p.num_vars() entries.
template <typename Scalar, typename T>
Scalar eval_with_gradient(const BasicPolyBundle<T>& p, std::span<const Scalar> x,
                          std::span<Scalar> grad) {
  detail::check_arity(p.num_vars(), p.empty(), x.size());
  detail::check_arity(p.num_vars(), p.empty(), grad.size());
  for (auto& g : grad) g = Scalar(0);
  if (p.empty()) return Scalar(0);
  std::vector<Scalar> pw;
  int stride = 0;
  detail::power_table(p, x, pw, stride);
  const int n = p.num_vars();
  Scalar total(0);
  for (const auto& term : p.terms()) {
    const auto& basis = term.basis();
    const auto& c = term.coeffs();
    for (std::size_t m = 0; m < basis.size(); ++m) {
      if (c[m] == 0) continue;
      const Exponent& e = basis[m];
      const Scalar cm = static_cast<Scalar>(c[m]);
      Scalar mono = cm;
      for (int i = 0; i < n; ++i) mono *= pw[i * stride + e[i]];
      total += mono;
      for (int i = 0; i < n; ++i) {
        if (e[i] == 0) continue;
        Scalar d = cm * Scalar(e[i]);
        for (int j = 0; j < n; ++j) {
          d *= pw[j * stride + (j == i ? e[j] - 1 : e[j])];
        }
        grad[i] += d;
      }
    }
  }
  return total;
}

// Product with every term of degree above d_max discarded.
template <typename T>
BasicPolyBundle<T> mul_trunc(const BasicPolyBundle<T>& a,
                             const BasicPolyBundle<T>& b, int d_max);

// q(z) = p(A z). A has p.num_vars() rows; its column count is the number of
// variables of q.
template <typename T>
BasicPolyBundle<T> compose_linear(
    const BasicPolyBundle<T>& p,
    const std::type_identity_t<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>>& A);

template <typename T>
BasicPolyBundle<T> partial_derivative(const BasicPolyBundle<T>& p, int var);

// Largest absolute coefficient difference over the union of degree ranges.
template <typename T>
T max_coeff_diff(const BasicPolyBundle<T>& a, const BasicPolyBundle<T>& b);

// In-place accumulation out += a * b for homogeneous factors.
template <typename T>
void accumulate_product(const BasicHomogeneousPoly<T>& a,
                        const BasicHomogeneousPoly<T>& b,
                        BasicHomogeneousPoly<T>& out);

// Coefficient dump: one line per term, `degree e1,e2,...,en coefficient`,
// coefficients written with 17 significant digits.
void write_dump(std::ostream& os, const PolyBundle& p);
// Lines containing '=' (metadata headers) and blank lines are skipped.
PolyBundle read_dump(std::istream& is);

}  // namespace ahmpc
