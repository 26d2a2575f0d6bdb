#include "ahmpc/poly.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ahmpc/kernels.hpp"
#include "ahmpc/quad.hpp"

namespace ahmpc {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

std::size_t monomial_count(int n, int d) {
  if (n < 1 || d < 0) return 0;
  return static_cast<std::size_t>(binomial(n + d - 1, d));
}

namespace {

void fill_exponents(int var, int remaining, Exponent& current,
                    std::vector<Exponent>& out) {
  const int n = static_cast<int>(current.size());
  if (var == n - 1) {
    current[var] = remaining;
    out.push_back(current);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    current[var] = v;
    fill_exponents(var + 1, remaining - v, current, out);
  }
}

}  // namespace

MonomialBasis::MonomialBasis(int num_vars, int degree)
    : num_vars_(num_vars), degree_(degree) {
  if (num_vars < 1) {
    throw std::invalid_argument("monomial basis needs at least one variable");
  }
  if (degree < 0) {
    throw std::invalid_argument("monomial degree must be nonnegative");
  }
  exponents_.reserve(monomial_count(num_vars, degree));
  Exponent current(static_cast<std::size_t>(num_vars), 0);
  fill_exponents(0, degree, current, exponents_);
}

std::shared_ptr<const MonomialBasis> MonomialBasis::shared(int num_vars,
                                                           int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>>
      cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{num_vars, degree}];
  if (!slot) slot = std::make_shared<const MonomialBasis>(num_vars, degree);
  return slot;
}

std::size_t graded_lex_rank(std::span<const int> e, int degree) {
  const int n = static_cast<int>(e.size());
  std::size_t rank = 0;
  int rem = degree;
  for (int i = 0; i + 1 < n; ++i) {
    const int r = n - i - 2;
    rank += static_cast<std::size_t>(binomial(rem - e[i] + r, r + 1));
    rem -= e[i];
  }
  return rank;
}

std::size_t MonomialBasis::index_of(std::span<const int> e) const {
  if (static_cast<int>(e.size()) != num_vars_) {
    throw std::invalid_argument("exponent length does not match basis");
  }
  int total = 0;
  for (int v : e) {
    if (v < 0) throw std::invalid_argument("negative exponent");
    total += v;
  }
  if (total != degree_) {
    throw std::invalid_argument("exponent degree does not match basis");
  }
  return graded_lex_rank(e, degree_);
}

MonomialBasis monomials(int num_vars, int degree) {
  return MonomialBasis(num_vars, degree);
}

template <typename T>
BasicHomogeneousPoly<T>::BasicHomogeneousPoly(int num_vars, int degree)
    : basis_(MonomialBasis::shared(num_vars, degree)),
      coeffs_(CoeffVector<T>::Zero(static_cast<Eigen::Index>(basis_->size()))) {}

template <typename T>
BasicHomogeneousPoly<T>::BasicHomogeneousPoly(
    std::shared_ptr<const MonomialBasis> basis, CoeffVector<T> coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != basis_->size()) {
    throw std::invalid_argument("coefficient count does not match basis");
  }
}

template <typename T>
T BasicHomogeneousPoly<T>::coeff(std::span<const int> e) const {
  return coeffs_[static_cast<Eigen::Index>(basis_->index_of(e))];
}

template <typename T>
void BasicHomogeneousPoly<T>::set_coeff(std::span<const int> e, T value) {
  coeffs_[static_cast<Eigen::Index>(basis_->index_of(e))] = value;
}

template <typename T>
BasicPolyBundle<T>::BasicPolyBundle(int num_vars, int lo, int hi)
    : num_vars_(num_vars), lo_(lo) {
  if (num_vars < 1) throw std::invalid_argument("bundle needs variables");
  if (lo < 0) throw std::invalid_argument("negative degree");
  for (int k = lo; k <= hi; ++k) terms_.emplace_back(num_vars, k);
}

template <typename T>
BasicPolyBundle<T> BasicPolyBundle<T>::constant(int num_vars, T c) {
  BasicPolyBundle p(num_vars, 0, 0);
  p.terms_[0].coeffs()[0] = c;
  return p;
}

template <typename T>
BasicPolyBundle<T> BasicPolyBundle<T>::variable(int num_vars, int i) {
  if (i < 0 || i >= num_vars) throw std::out_of_range("variable index");
  BasicPolyBundle p(num_vars, 1, 1);
  p.terms_[0].coeffs()[i] = T(1);
  return p;
}

template <typename T>
BasicHomogeneousPoly<T>& BasicPolyBundle<T>::term(int k) {
  if (!has_degree(k)) throw std::out_of_range("degree outside bundle range");
  return terms_[static_cast<std::size_t>(k - lo_)];
}

template <typename T>
const BasicHomogeneousPoly<T>& BasicPolyBundle<T>::term(int k) const {
  if (!has_degree(k)) throw std::out_of_range("degree outside bundle range");
  return terms_[static_cast<std::size_t>(k - lo_)];
}

namespace {

int degree_of(std::span<const int> e) {
  int total = 0;
  for (int v : e) total += v;
  return total;
}

}  // namespace

template <typename T>
T BasicPolyBundle<T>::coeff(std::span<const int> e) const {
  const int k = degree_of(e);
  if (!has_degree(k)) return T(0);
  return term(k).coeff(e);
}

template <typename T>
void BasicPolyBundle<T>::set_coeff(std::span<const int> e, T value) {
  term(degree_of(e)).set_coeff(e, value);
}

template <typename T>
BasicPolyBundle<T> BasicPolyBundle<T>::restricted(int lo, int hi) const {
  BasicPolyBundle out(num_vars_, lo, hi);
  for (int k = std::max(lo, lo_); k <= std::min(hi, max_degree()); ++k) {
    out.term(k).coeffs() = term(k).coeffs();
  }
  return out;
}

template <typename T>
std::size_t BasicPolyBundle<T>::coefficient_count() const {
  std::size_t total = 0;
  for (const auto& t : terms_) total += t.size();
  return total;
}

template <typename T>
bool BasicPolyBundle<T>::all_finite() const {
  using std::isfinite;
  for (const auto& t : terms_) {
    for (Eigen::Index i = 0; i < t.coeffs().size(); ++i) {
      if (!isfinite(t.coeffs()[i])) return false;
    }
  }
  return true;
}

template <typename T>
BasicPolyBundle<T>& BasicPolyBundle<T>::operator+=(const BasicPolyBundle& other) {
  if (other.empty()) return *this;
  if (empty()) {
    if (num_vars_ != 0 && num_vars_ != other.num_vars_) {
      throw std::invalid_argument("variable count mismatch");
    }
    *this = other;
    return *this;
  }
  if (num_vars_ != other.num_vars_) {
    throw std::invalid_argument("variable count mismatch");
  }
  const int lo = std::min(lo_, other.lo_);
  const int hi = std::max(max_degree(), other.max_degree());
  if (lo != lo_ || hi != max_degree()) *this = restricted(lo, hi);
  for (const auto& t : other.terms_) term(t.degree()).coeffs() += t.coeffs();
  return *this;
}

template <typename T>
BasicPolyBundle<T>& BasicPolyBundle<T>::operator-=(const BasicPolyBundle& other) {
  return *this += other * T(-1);
}

template <typename T>
BasicPolyBundle<T>& BasicPolyBundle<T>::operator*=(T s) {
  for (auto& t : terms_) t.coeffs() *= s;
  return *this;
}

namespace detail {

void check_arity(int num_vars, bool empty, std::size_t n) {
  if (!empty && static_cast<std::size_t>(num_vars) != n) {
    throw std::invalid_argument("argument length " + std::to_string(n) +
                                " does not match polynomial arity " +
                                std::to_string(num_vars));
  }
}

}  // namespace detail

template <typename T>
void accumulate_product(const BasicHomogeneousPoly<T>& a,
                        const BasicHomogeneousPoly<T>& b,
                        BasicHomogeneousPoly<T>& out) {
  if (a.num_vars() != b.num_vars() || out.num_vars() != a.num_vars() ||
      out.degree() != a.degree() + b.degree()) {
    throw std::invalid_argument("incompatible homogeneous product");
  }
  const auto& table = product_table(a.num_vars(), a.degree(), b.degree());
  const auto& ca = a.coeffs();
  const auto& cb = b.coeffs();
  auto& co = out.coeffs();
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T ai = ca[static_cast<Eigen::Index>(i)];
    if (ai == 0) continue;
    const std::uint32_t* row = table.data() + i * nb;
    for (std::size_t j = 0; j < nb; ++j) {
      co[row[j]] += ai * cb[static_cast<Eigen::Index>(j)];
    }
  }
}

template <typename T>
BasicPolyBundle<T> mul_trunc(const BasicPolyBundle<T>& a,
                             const BasicPolyBundle<T>& b, int d_max) {
  if (!a.empty() && !b.empty() && a.num_vars() != b.num_vars()) {
    throw std::invalid_argument("mul_trunc: variable count mismatch");
  }
  const int n = a.empty() ? b.num_vars() : a.num_vars();
  const int lo = a.min_degree() + b.min_degree();
  if (a.empty() || b.empty()) {
    return BasicPolyBundle<T>(std::max(n, 1), lo, lo - 1);
  }
  const int hi = std::min(a.max_degree() + b.max_degree(), d_max);
  BasicPolyBundle<T> out(n, lo, hi);
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      const int k = ta.degree() + tb.degree();
      if (k > hi) continue;
      accumulate_product(ta, tb, out.term(k));
    }
  }
  return out;
}

template <typename T>
BasicPolyBundle<T> compose_linear(
    const BasicPolyBundle<T>& p,
    const std::type_identity_t<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>>& A) {
  if (A.rows() != p.num_vars()) {
    throw std::invalid_argument("compose_linear: matrix rows must equal arity");
  }
  const int n_new = static_cast<int>(A.cols());
  if (p.empty()) {
    return BasicPolyBundle<T>(n_new, p.min_degree(), p.min_degree() - 1);
  }
  BasicPolyBundle<T> out(n_new, p.min_degree(), p.max_degree());
  for (const auto& t : p.terms()) {
    const DenseMatrix<T> S = substitution_matrix<T>(A, t.degree());
    out.term(t.degree()).coeffs() = S * t.coeffs();
  }
  return out;
}

template <typename T>
BasicPolyBundle<T> partial_derivative(const BasicPolyBundle<T>& p, int var) {
  if (var < 0 || var >= p.num_vars()) {
    throw std::out_of_range("partial_derivative: variable index");
  }
  const int lo = std::max(p.min_degree(), 1) - 1;
  const int hi = p.max_degree() - 1;
  BasicPolyBundle<T> out(p.num_vars(), lo, hi);
  Exponent shifted;
  for (const auto& t : p.terms()) {
    if (t.degree() == 0) continue;
    auto& target = out.term(t.degree() - 1);
    for (std::size_t m = 0; m < t.size(); ++m) {
      const Exponent& e = t.basis()[m];
      if (e[var] == 0) continue;
      shifted = e;
      shifted[var] -= 1;
      target.coeffs()[static_cast<Eigen::Index>(
          graded_lex_rank(shifted, t.degree() - 1))] +=
          T(e[var]) * t.coeffs()[static_cast<Eigen::Index>(m)];
    }
  }
  return out;
}

template <typename T>
T max_coeff_diff(const BasicPolyBundle<T>& a, const BasicPolyBundle<T>& b) {
  BasicPolyBundle<T> diff = a;
  diff -= b;
  T worst(0);
  for (const auto& t : diff.terms()) {
    if (t.size() > 0) worst = std::max<T>(worst, t.coeffs().cwiseAbs().maxCoeff());
  }
  return worst;
}

#define AHMPC_INSTANTIATE_POLY(T)                                             \
  template class BasicHomogeneousPoly<T>;                                     \
  template class BasicPolyBundle<T>;                                          \
  template void accumulate_product(const BasicHomogeneousPoly<T>&,            \
                                   const BasicHomogeneousPoly<T>&,            \
                                   BasicHomogeneousPoly<T>&);                 \
  template BasicPolyBundle<T> mul_trunc(const BasicPolyBundle<T>&,            \
                                        const BasicPolyBundle<T>&, int);      \
  template BasicPolyBundle<T> compose_linear(                                 \
      const BasicPolyBundle<T>&,                                              \
      const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>&);               \
  template BasicPolyBundle<T> partial_derivative(const BasicPolyBundle<T>&,   \
                                                 int);                        \
  template T max_coeff_diff(const BasicPolyBundle<T>&, const BasicPolyBundle<T>&);

AHMPC_INSTANTIATE_POLY(double)
AHMPC_INSTANTIATE_POLY(Quad)

void write_dump(std::ostream& os, const PolyBundle& p) {
  char buf[64];
  for (const auto& t : p.terms()) {
    for (std::size_t m = 0; m < t.size(); ++m) {
      os << t.degree() << ' ';
      const Exponent& e = t.basis()[m];
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (i) os << ',';
        os << e[i];
      }
      std::snprintf(buf, sizeof buf, " %.17g\n",
                    t.coeffs()[static_cast<Eigen::Index>(m)]);
      os << buf;
    }
  }
}

PolyBundle read_dump(std::istream& is) {
  struct Entry {
    Exponent e;
    double c;
  };
  std::vector<Entry> entries;
  int n = 0;
  int lo = 0;
  int hi = -1;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.find('=') != std::string::npos) continue;
    std::istringstream ls(line);
    int degree = 0;
    std::string tuple;
    Entry entry;
    if (!(ls >> degree >> tuple >> entry.c)) {
      throw std::runtime_error("malformed dump line: " + line);
    }
    std::istringstream ts(tuple);
    std::string part;
    while (std::getline(ts, part, ',')) entry.e.push_back(std::stoi(part));
    if (n == 0) n = static_cast<int>(entry.e.size());
    if (static_cast<int>(entry.e.size()) != n || degree_of(entry.e) != degree) {
      throw std::runtime_error("inconsistent dump line: " + line);
    }
    if (hi < lo) {
      lo = hi = degree;
    } else {
      lo = std::min(lo, degree);
      hi = std::max(hi, degree);
    }
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw std::runtime_error("empty coefficient dump");
  PolyBundle p(n, lo, hi);
  for (const auto& entry : entries) p.set_coeff(entry.e, entry.c);
  return p;
}

}  // namespace ahmpc
