#include "ahmpc/jet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ahmpc/quad.hpp"

namespace ahmpc {

template <typename T>
BasicJet<T>::BasicJet(int num_vars, int order) : series_(num_vars, 0, order) {
  if (order < 0) throw std::invalid_argument("jet order must be nonnegative");
}

template <typename T>
BasicJet<T>::BasicJet(Series series) : series_(std::move(series)) {
  if (series_.empty() || series_.min_degree() != 0) {
    throw std::invalid_argument("jet series must start at degree 0");
  }
}

template <typename T>
BasicJet<T> BasicJet<T>::constant(int num_vars, int order, T c) {
  BasicJet j(num_vars, order);
  j.series_.term(0).coeffs()[0] = c;
  return j;
}

template <typename T>
BasicJet<T> BasicJet<T>::variable(int num_vars, int order, int i, T value) {
  if (i < 0 || i >= num_vars) throw std::out_of_range("jet seed index");
  BasicJet j = constant(num_vars, order, value);
  if (order >= 1) j.series_.term(1).coeffs()[i] = T(1);
  return j;
}

template <typename T>
void BasicJet<T>::check_compatible(const BasicJet& o) const {
  if (o.num_vars() != num_vars() || o.order() != order()) {
    throw std::invalid_argument("jet shape mismatch");
  }
}

template <typename T>
void BasicJet<T>::add_scaled(T c, const BasicJet& x) {
  check_compatible(x);
  if (c == 0) return;
  for (int k = 0; k <= order(); ++k) {
    series_.term(k).coeffs() += c * x.series_.term(k).coeffs();
  }
}

template <typename T>
BasicJet<T>& BasicJet<T>::operator+=(const BasicJet& o) {
  add_scaled(T(1), o);
  return *this;
}

template <typename T>
BasicJet<T>& BasicJet<T>::operator-=(const BasicJet& o) {
  add_scaled(T(-1), o);
  return *this;
}

template <typename T>
BasicJet<T>& BasicJet<T>::operator*=(const BasicJet& o) {
  check_compatible(o);
  series_ = mul_trunc(series_, o.series_, order());
  return *this;
}

template <typename T>
BasicJet<T>& BasicJet<T>::operator/=(const BasicJet& o) {
  check_compatible(o);
  return *this *= o.reciprocal();
}

template <typename T>
BasicJet<T>& BasicJet<T>::operator+=(T c) {
  series_.term(0).coeffs()[0] += c;
  return *this;
}

template <typename T>
BasicJet<T>& BasicJet<T>::operator-=(T c) {
  series_.term(0).coeffs()[0] -= c;
  return *this;
}

template <typename T>
BasicJet<T>& BasicJet<T>::operator*=(T c) {
  series_ *= c;
  return *this;
}

template <typename T>
BasicJet<T>& BasicJet<T>::operator/=(T c) {
  if (c == 0) throw std::domain_error("jet division by zero constant");
  series_ *= T(1) / c;
  return *this;
}

template <typename T>
BasicJet<T> BasicJet<T>::nilpotent_part() const {
  BasicJet t = *this;
  t.series_.term(0).coeffs()[0] = T(0);
  return t;
}

template <typename T>
BasicJet<T> BasicJet<T>::reciprocal() const {
  const T b0 = value();
  if (b0 == 0) {
    throw std::domain_error("jet division by a series with zero constant term");
  }
  // 1/(b0 + t) = (1/b0) * sum_k (-t/b0)^k
  const BasicJet ratio = nilpotent_part() * (T(-1) / b0);
  BasicJet sum = constant(num_vars(), order(), T(1));
  BasicJet power = sum;
  for (int k = 1; k <= order(); ++k) {
    power *= ratio;
    sum += power;
  }
  return sum * (T(1) / b0);
}

namespace {

// sin(t) and cos(t) for a jet t with zero constant term.
template <typename T>
void sin_cos_nilpotent(const BasicJet<T>& t, BasicJet<T>& s, BasicJet<T>& c) {
  const int n = t.num_vars();
  const int order = t.order();
  s = BasicJet<T>(n, order);
  c = BasicJet<T>::constant(n, order, T(1));
  BasicJet<T> power = BasicJet<T>::constant(n, order, T(1));
  T factorial(1);
  for (int k = 1; k <= order; ++k) {
    power *= t;
    factorial *= T(k);
    const T sign = ((k / 2) % 2 == 0) ? T(1) : T(-1);
    if (k % 2 == 1) {
      s.add_scaled(sign / factorial, power);
    } else {
      c.add_scaled(sign / factorial, power);
    }
  }
}

}  // namespace

template <typename T>
BasicJet<T> BasicJet<T>::sin_impl() const {
  using std::cos;
  using std::sin;
  BasicJet s(num_vars(), order()), c(num_vars(), order());
  sin_cos_nilpotent(nilpotent_part(), s, c);
  const T a0 = value();
  BasicJet out = c * T(sin(a0));
  out.add_scaled(T(cos(a0)), s);
  return out;
}

template <typename T>
BasicJet<T> BasicJet<T>::cos_impl() const {
  using std::cos;
  using std::sin;
  BasicJet s(num_vars(), order()), c(num_vars(), order());
  sin_cos_nilpotent(nilpotent_part(), s, c);
  const T a0 = value();
  BasicJet out = c * T(cos(a0));
  out.add_scaled(T(-sin(a0)), s);
  return out;
}

PolyBundle jet_lift(const JetFunction& f, std::span<const double> point,
                    int d) {
  if (point.empty()) throw std::invalid_argument("jet_lift needs inputs");
  if (d < 0) throw std::invalid_argument("jet_lift order must be nonnegative");
  const int n = static_cast<int>(point.size());
  std::vector<Jet> seeds;
  seeds.reserve(point.size());
  for (int i = 0; i < n; ++i) seeds.push_back(Jet::variable(n, d, i, point[i]));
  const Jet result = f(seeds);
  if (result.num_vars() != n || result.order() != d) {
    throw std::invalid_argument("jet_lift: function changed the jet shape");
  }
  return result.series();
}

template <typename T>
BasicJetSubstitution<T>::BasicJetSubstitution(std::vector<BasicJet<T>> args,
                                              int max_degree)
    : args_(std::move(args)), max_degree_(max_degree) {
  if (args_.empty()) throw std::invalid_argument("substitution needs args");
  num_vars_ = args_.front().num_vars();
  order_ = args_.front().order();
  nilpotent_args_ = true;
  for (const auto& a : args_) {
    if (a.num_vars() != num_vars_ || a.order() != order_) {
      throw std::invalid_argument("substitution args differ in shape");
    }
    if (a.value() != 0) nilpotent_args_ = false;
  }
  const int n_args = static_cast<int>(args_.size());
  const int cap = nilpotent_args_ ? std::min(max_degree_, order_) : max_degree_;
  monomials_.resize(static_cast<std::size_t>(std::max(max_degree_, 0) + 1));
  monomials_[0].push_back(BasicJet<T>::constant(num_vars_, order_, T(1)));
  Exponent reduced;
  for (int k = 1; k <= cap; ++k) {
    const auto basis = MonomialBasis::shared(n_args, k);
    auto& level = monomials_[static_cast<std::size_t>(k)];
    level.reserve(basis->size());
    for (const auto& alpha : basis->exponents()) {
      int first = 0;
      while (alpha[first] == 0) ++first;
      reduced = alpha;
      reduced[first] -= 1;
      level.push_back(monomials_[static_cast<std::size_t>(k - 1)]
                                [graded_lex_rank(reduced, k - 1)] *
                      args_[static_cast<std::size_t>(first)]);
    }
  }
}

template <typename T>
BasicJet<T> BasicJetSubstitution<T>::apply(const BasicPolyBundle<T>& p) const {
  BasicJet<T> out(num_vars_, order_);
  if (p.empty()) return out;
  if (p.num_vars() != static_cast<int>(args_.size())) {
    throw std::invalid_argument("substitution arity mismatch");
  }
  if (p.max_degree() > max_degree_) {
    throw std::invalid_argument("polynomial degree " +
                                std::to_string(p.max_degree()) +
                                " exceeds substitution capacity");
  }
  for (const auto& t : p.terms()) {
    const auto& level = monomials_[static_cast<std::size_t>(t.degree())];
    if (level.empty()) continue;
    for (std::size_t m = 0; m < t.size(); ++m) {
      out.add_scaled(t.coeffs()[static_cast<Eigen::Index>(m)], level[m]);
    }
  }
  return out;
}

template class BasicJet<double>;
template class BasicJet<Quad>;
template class BasicJetSubstitution<double>;
template class BasicJetSubstitution<Quad>;

}  // namespace ahmpc
