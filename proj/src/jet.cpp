#include "shilov/jet.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <string>

#include "shilov/errors.hpp"
#include "shilov/kernels.hpp"

namespace shilov {

namespace {

void require_same_space(const JetSpacePtr& a, const JetSpacePtr& b, const char* what) {
  if (a == b) return;
  if (a->num_vars() != b->num_vars())
    throw DimensionError(std::string(what) + ": jets have different numbers of variables");
  if (a->order() != b->order())
    throw JetOrderError(std::string(what) + ": jets have different truncation orders");
}

// Nondecreasing variable tuples of length d over m variables, lexicographic.
void enumerate_degree(int m, int d, std::vector<std::array<std::uint8_t, JetSpace::kMaxOrder>>& out) {
  std::array<std::uint8_t, JetSpace::kMaxOrder> cur{};
  if (d == 0) {
    out.push_back(cur);
    return;
  }
  std::vector<int> idx(d, 0);
  while (true) {
    for (int i = 0; i < d; ++i) cur[i] = static_cast<std::uint8_t>(idx[i]);
    out.push_back(cur);
    int pos = d - 1;
    while (pos >= 0 && idx[pos] == m - 1) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < d; ++i) idx[i] = idx[pos];
  }
}

}  // namespace

JetSpacePtr JetSpace::get(int num_vars, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, JetSpacePtr> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{num_vars, order}];
  if (!slot) slot = std::make_shared<const JetSpace>(num_vars, order);
  return slot;
}

JetSpace::JetSpace(int num_vars, int order) : num_vars_(num_vars), order_(order) {
  if (num_vars < 1 || num_vars > 254) throw DimensionError("JetSpace: num_vars must be in [1, 254]");
  if (order < 0 || order > kMaxOrder)
    throw JetOrderError("JetSpace: order must be in [0, " + std::to_string(kMaxOrder) + "]");

  for (int d = 0; d <= order; ++d) {
    degree_begin_.push_back(vars_.size());
    enumerate_degree(num_vars, d, vars_);
    degree_.resize(vars_.size(), d);
  }
  degree_begin_.push_back(vars_.size());

  sorted_keys_.reserve(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i)
    sorted_keys_.emplace_back(key(variables(i)), static_cast<std::uint32_t>(i));
  std::sort(sorted_keys_.begin(), sorted_keys_.end());

  std::vector<MulEntry> entries;
  std::array<std::uint8_t, kMaxOrder> merged{};
  for (std::size_t a = 0; a < size(); ++a) {
    const int da = degree_[a];
    const std::size_t b_end = degree_begin_[order - da + 1];
    for (std::size_t b = 0; b < b_end; ++b) {
      auto va = variables(a);
      auto vb = variables(b);
      std::merge(va.begin(), va.end(), vb.begin(), vb.end(), merged.begin());
      const std::size_t out = lookup({merged.data(), va.size() + vb.size()});
      entries.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                         static_cast<std::uint32_t>(out)});
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const MulEntry& x, const MulEntry& y) { return x.out < y.out; });
  mul_ = std::move(entries);
  mul_offsets_.assign(size() + 1, 0);
  for (const auto& e : mul_) ++mul_offsets_[e.out + 1];
  for (std::size_t i = 0; i < size(); ++i) mul_offsets_[i + 1] += mul_offsets_[i];

  deriv_.resize(num_vars);
  for (std::size_t src = 1; src < size(); ++src) {
    auto v = variables(src);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0 && v[i] == v[i - 1]) continue;
      const auto mult = std::count(v.begin(), v.end(), v[i]);
      std::array<std::uint8_t, kMaxOrder> rest{};
      std::size_t r = 0;
      for (std::size_t k = 0; k < v.size(); ++k)
        if (k != i) rest[r++] = v[k];
      const std::size_t dst = lookup({rest.data(), r});
      deriv_[v[i]].push_back({static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst),
                              static_cast<double>(mult)});
    }
  }
}

std::uint64_t JetSpace::key(std::span<const std::uint8_t> sorted_vars) const {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < sorted_vars.size(); ++i)
    k |= static_cast<std::uint64_t>(sorted_vars[i] + 1) << (8 * i);
  return k;
}

std::size_t JetSpace::lookup(std::span<const std::uint8_t> sorted_vars) const {
  if (static_cast<int>(sorted_vars.size()) > order_)
    throw JetOrderError("JetSpace: monomial degree exceeds truncation order");
  const std::uint64_t k = key(sorted_vars);
  auto it = std::lower_bound(sorted_keys_.begin(), sorted_keys_.end(), std::make_pair(k, std::uint32_t{0}));
  if (it == sorted_keys_.end() || it->first != k) throw DimensionError("JetSpace: unknown monomial");
  return it->second;
}

std::vector<int> JetSpace::exponents(std::size_t idx) const {
  std::vector<int> e(num_vars_, 0);
  for (auto v : variables(idx)) ++e[v];
  return e;
}

std::size_t JetSpace::index_of(std::span<const int> exponents) const {
  if (static_cast<int>(exponents.size()) != num_vars_)
    throw DimensionError("JetSpace::index_of: exponent vector has wrong length");
  std::array<std::uint8_t, kMaxOrder> vars{};
  std::size_t d = 0;
  for (int v = 0; v < num_vars_; ++v) {
    if (exponents[v] < 0) throw DimensionError("JetSpace::index_of: negative exponent");
    for (int k = 0; k < exponents[v]; ++k) {
      if (static_cast<int>(d) >= order_)
        throw JetOrderError("JetSpace::index_of: monomial degree exceeds truncation order");
      vars[d++] = static_cast<std::uint8_t>(v);
    }
  }
  return lookup({vars.data(), d});
}

double JetSpace::monomial_value(std::size_t idx, std::span<const double> t) const {
  double r = 1.0;
  for (auto v : variables(idx)) r *= t[v];
  return r;
}

// ---------------------------------------------------------------------------
// Jet

Jet::Jet(JetSpacePtr space) : space_(std::move(space)), coeffs_(space_->size(), Complex(0.0)) {}

Jet::Jet(JetSpacePtr space, std::vector<Complex> coeffs) : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != space_->size()) throw DimensionError("Jet: coefficient count does not match space");
}

Jet Jet::constant(JetSpacePtr space, Complex value) {
  Jet j(std::move(space));
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(JetSpacePtr space, int v) {
  if (v < 0 || v >= space->num_vars()) throw DimensionError("Jet::variable: index out of range");
  if (space->order() < 1) throw JetOrderError("Jet::variable: order 0 cannot hold a variable");
  Jet j(space);
  j.coeffs_[space->var_index(v)] = 1.0;
  return j;
}

Jet& Jet::operator+=(const Jet& o) {
  require_same_space(space_, o.space_, "jet add");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  require_same_space(space_, o.space_, "jet sub");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

Jet Jet::conj() const {
  Jet r = *this;
  for (auto& c : r.coeffs_) c = std::conj(c);
  return r;
}

Jet Jet::inverse() const {
  const Complex c = coeffs_[0];
  if (c == Complex(0.0)) throw NumericError("jet inverse: zero constant term");
  // 1/(c(1+N)) = c^{-1} sum (-N)^i, N nilpotent of index order+1.
  Jet N = *this;
  N.coeffs_[0] = 0.0;
  N *= 1.0 / c;
  Jet term = constant(space_, 1.0 / c);
  Jet result = term;
  for (int i = 1; i <= order(); ++i) {
    term = -(N * term);
    result += term;
  }
  return result;
}

Jet Jet::derivative(int v) const {
  if (v < 0 || v >= num_vars()) throw DimensionError("jet derivative: variable out of range");
  if (order() < 1) throw JetOrderError("jet derivative: order 0 jet has no derivative");
  Jet r(JetSpace::get(num_vars(), order() - 1));
  for (const auto& e : space_->derivative_table(v)) r.coeffs_[e.dst] += e.factor * coeffs_[e.src];
  return r;
}

Jet Jet::truncated(int k) const {
  if (k > order()) throw JetOrderError("jet truncate: cannot raise the order");
  auto sp = JetSpace::get(num_vars(), k);
  return Jet(sp, std::vector<Complex>(coeffs_.begin(), coeffs_.begin() + sp->size()));
}

Complex Jet::evaluate(std::span<const double> t) const {
  if (static_cast<int>(t.size()) != num_vars()) throw DimensionError("jet evaluate: wrong point dimension");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) acc += coeffs_[i] * space_->monomial_value(i, t);
  return acc;
}

double Jet::max_abs() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  require_same_space(a.space(), b.space(), "jet mul");
  Jet r(a.space());
  for (const auto& e : a.space()->mul_table()) r[e.out] += a[e.a] * b[e.b];
  return r;
}

Jet operator*(Complex s, Jet a) { return a *= s; }

Jet jet_arith(const Jet& a, const Jet& b, JetOp op) {
  switch (op) {
    case JetOp::add: return a + b;
    case JetOp::sub: return a - b;
    case JetOp::mul: return a * b;
  }
  throw DimensionError("jet_arith: unknown op");
}

Jet jet_inverse(const Jet& a) { return a.inverse(); }
Jet jet_conj(const Jet& a) { return a.conj(); }

// ---------------------------------------------------------------------------
// ExteriorForm

ExteriorForm::ExteriorForm(int degree, JetSpacePtr space) : degree_(degree), space_(std::move(space)) {
  if (degree < 0 || degree > 2) throw ConstraintError("ExteriorForm: degree must be 0, 1 or 2");
  const int m = space_->num_vars();
  const std::size_t count = degree == 0 ? 1 : degree == 1 ? m : num_pairs(m);
  components_.assign(count, Jet(space_));
}

ExteriorForm ExteriorForm::function(Jet f) {
  ExteriorForm r(0, f.space());
  r.components_[0] = std::move(f);
  return r;
}

ExteriorForm ExteriorForm::coordinate_differential(JetSpacePtr space, int v) {
  if (v < 0 || v >= space->num_vars()) throw DimensionError("coordinate_differential: index out of range");
  ExteriorForm r(1, space);
  r.components_[v] = Jet::constant(space, 1.0);
  return r;
}

std::size_t ExteriorForm::pair_index(int i, int j, int m) {
  if (!(0 <= i && i < j && j < m)) throw DimensionError("pair_index: need 0 <= i < j < m");
  return static_cast<std::size_t>(i) * m - static_cast<std::size_t>(i) * (i + 1) / 2 + (j - i - 1);
}

ExteriorForm& ExteriorForm::operator+=(const ExteriorForm& o) {
  if (degree_ != o.degree_) throw DimensionError("form add: degree mismatch");
  for (std::size_t i = 0; i < components_.size(); ++i) components_[i] += o.components_[i];
  return *this;
}

ExteriorForm& ExteriorForm::operator-=(const ExteriorForm& o) {
  if (degree_ != o.degree_) throw DimensionError("form sub: degree mismatch");
  for (std::size_t i = 0; i < components_.size(); ++i) components_[i] -= o.components_[i];
  return *this;
}

ExteriorForm ExteriorForm::truncated(int k) const {
  ExteriorForm r(degree_, JetSpace::get(num_vars(), k));
  for (std::size_t i = 0; i < components_.size(); ++i) r.components_[i] = components_[i].truncated(k);
  return r;
}

double ExteriorForm::max_abs() const {
  double m = 0.0;
  for (const auto& c : components_) m = std::max(m, c.max_abs());
  return m;
}

ExteriorForm operator+(ExteriorForm a, const ExteriorForm& b) { return a += b; }
ExteriorForm operator-(ExteriorForm a, const ExteriorForm& b) { return a -= b; }

ExteriorForm operator*(const Jet& f, const ExteriorForm& a) {
  require_same_space(f.space(), a.space(), "form scale");
  ExteriorForm r(a.degree(), a.space());
  for (std::size_t i = 0; i < a.num_components(); ++i) r.component(i) = f * a.component(i);
  return r;
}

ExteriorForm wedge(const ExteriorForm& a, const ExteriorForm& b) {
  if (a.degree() + b.degree() > 2) throw ConstraintError("wedge: resulting degree exceeds 2");
  require_same_space(a.space(), b.space(), "wedge");
  if (a.degree() == 0) return a.component(0) * b;
  if (b.degree() == 0) return b.component(0) * a;
  const int m = a.num_vars();
  ExteriorForm r(2, a.space());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      r.component(ExteriorForm::pair_index(i, j, m)) = a.component(i) * b.component(j) - a.component(j) * b.component(i);
  return r;
}

ExteriorForm exterior_d(const ExteriorForm& a) {
  if (a.degree() > 1) throw ConstraintError("exterior_d: 3-forms are not supported");
  if (a.order() < 1) throw JetOrderError("exterior_d: needs jet order >= 1");
  const int m = a.num_vars();
  ExteriorForm r(a.degree() + 1, JetSpace::get(m, a.order() - 1));
  if (a.degree() == 0) {
    for (int i = 0; i < m; ++i) r.component(i) = a.component(0).derivative(i);
    return r;
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      r.component(ExteriorForm::pair_index(i, j, m)) = a.component(j).derivative(i) - a.component(i).derivative(j);
  return r;
}

std::vector<Complex> evaluate_at_origin(const ExteriorForm& a) {
  std::vector<Complex> out;
  out.reserve(a.num_components());
  for (std::size_t i = 0; i < a.num_components(); ++i) out.push_back(a.component(i).constant_term());
  return out;
}

// ---------------------------------------------------------------------------
// MatrixJet

MatrixJet::MatrixJet(JetSpacePtr space, Eigen::Index rows, Eigen::Index cols)
    : space_(std::move(space)), rows_(rows), cols_(cols), coeffs_(space_->size(), ComplexMatrix::Zero(rows, cols)) {}

MatrixJet MatrixJet::constant(JetSpacePtr space, const ComplexMatrix& value) {
  MatrixJet r(std::move(space), value.rows(), value.cols());
  r.coeffs_[0] = value;
  return r;
}

MatrixJet MatrixJet::from_entries(Eigen::Index rows, Eigen::Index cols, const std::vector<Jet>& entries) {
  if (static_cast<Eigen::Index>(entries.size()) != rows * cols || entries.empty())
    throw DimensionError("MatrixJet::from_entries: need rows*cols entries");
  MatrixJet r(entries[0].space(), rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) r.set_entry(i, j, entries[i * cols + j]);
  return r;
}

Jet MatrixJet::entry(Eigen::Index i, Eigen::Index j) const {
  Jet r(space_);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) r[k] = coeffs_[k](i, j);
  return r;
}

void MatrixJet::set_entry(Eigen::Index i, Eigen::Index j, const Jet& v) {
  require_same_space(space_, v.space(), "MatrixJet::set_entry");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k](i, j) = v[k];
}

MatrixJet MatrixJet::block(Eigen::Index r, Eigen::Index c, Eigen::Index nr, Eigen::Index nc) const {
  MatrixJet out(space_, nr, nc);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out.coeffs_[k] = coeffs_[k].block(r, c, nr, nc);
  return out;
}

void MatrixJet::set_block(Eigen::Index r, Eigen::Index c, const MatrixJet& b) {
  require_same_space(space_, b.space_, "MatrixJet::set_block");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k].block(r, c, b.rows_, b.cols_) = b.coeffs_[k];
}

MatrixJet MatrixJet::adjoint() const {
  MatrixJet out(space_, cols_, rows_);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out.coeffs_[k] = coeffs_[k].adjoint();
  return out;
}

MatrixJet MatrixJet::transpose() const {
  MatrixJet out(space_, cols_, rows_);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out.coeffs_[k] = coeffs_[k].transpose();
  return out;
}

MatrixJet MatrixJet::derivative(int v) const {
  if (v < 0 || v >= num_vars()) throw DimensionError("MatrixJet derivative: variable out of range");
  if (order() < 1) throw JetOrderError("MatrixJet derivative: order 0 jet has no derivative");
  MatrixJet out(JetSpace::get(num_vars(), order() - 1), rows_, cols_);
  for (const auto& e : space_->derivative_table(v)) out.coeffs_[e.dst] += e.factor * coeffs_[e.src];
  return out;
}

MatrixJet MatrixJet::truncated(int k) const {
  if (k > order()) throw JetOrderError("MatrixJet truncate: cannot raise the order");
  MatrixJet out(JetSpace::get(num_vars(), k), rows_, cols_);
  for (std::size_t i = 0; i < out.coeffs_.size(); ++i) out.coeffs_[i] = coeffs_[i];
  return out;
}

ComplexMatrix MatrixJet::evaluate(std::span<const double> t) const {
  if (static_cast<int>(t.size()) != num_vars()) throw DimensionError("MatrixJet evaluate: wrong point dimension");
  ComplexMatrix acc = ComplexMatrix::Zero(rows_, cols_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) acc += space_->monomial_value(i, t) * coeffs_[i];
  return acc;
}

double MatrixJet::max_abs() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, shilov::max_abs(c));
  return m;
}

double MatrixJet::max_abs_degree(int d) const {
  if (d < 0 || d > order()) return 0.0;
  double m = 0.0;
  for (std::size_t i = space_->degree_begin(d); i < space_->degree_begin(d + 1); ++i)
    m = std::max(m, shilov::max_abs(coeffs_[i]));
  return m;
}

MatrixJet& MatrixJet::operator+=(const MatrixJet& o) {
  require_same_space(space_, o.space_, "MatrixJet add");
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("MatrixJet add: shape mismatch");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  return *this;
}

MatrixJet& MatrixJet::operator-=(const MatrixJet& o) {
  require_same_space(space_, o.space_, "MatrixJet sub");
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("MatrixJet sub: shape mismatch");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  return *this;
}

MatrixJet& MatrixJet::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

MatrixJet MatrixJet::inverse() const {
  if (rows_ != cols_) throw DimensionError("MatrixJet inverse: not square");
  Eigen::FullPivLU<ComplexMatrix> lu(coeffs_[0]);
  if (!lu.isInvertible()) throw NumericError("MatrixJet inverse: singular constant term");
  const ComplexMatrix a0inv = lu.inverse();
  // (A0 + R)^{-1} = sum_i (-A0^{-1} R)^i A0^{-1}
  MatrixJet N = a0inv * (*this);
  N.coeffs_[0].setZero();
  MatrixJet term = constant(space_, a0inv);
  MatrixJet result = term;
  for (int i = 1; i <= order(); ++i) {
    term = N * term;
    term *= -1.0;
    result += term;
  }
  return result;
}

MatrixJet MatrixJet::exp_nilpotent(const MatrixJet& X) {
  if (X.rows_ != X.cols_) throw DimensionError("MatrixJet exp: not square");
  if (shilov::max_abs(X.coeffs_[0]) != 0.0) throw ConstraintError("MatrixJet exp: constant term must vanish");
  MatrixJet term = constant(X.space_, ComplexMatrix::Identity(X.rows_, X.cols_));
  MatrixJet result = term;
  for (int i = 1; i <= X.order(); ++i) {
    term = X * term;
    term *= 1.0 / i;
    result += term;
  }
  return result;
}

MatrixJet operator+(MatrixJet a, const MatrixJet& b) { return a += b; }
MatrixJet operator-(MatrixJet a, const MatrixJet& b) { return a -= b; }
MatrixJet operator*(const MatrixJet& a, const MatrixJet& b) { return kernels::matrix_jet_product(a, b); }

MatrixJet operator*(const ComplexMatrix& m, const MatrixJet& a) {
  if (m.cols() != a.rows()) throw DimensionError("matrix * MatrixJet: shape mismatch");
  MatrixJet out(a.space(), m.rows(), a.cols());
  for (std::size_t k = 0; k < a.coeffs().size(); ++k) out.coeffs()[k].noalias() = m * a.coeffs()[k];
  return out;
}

MatrixJet operator*(const MatrixJet& a, const ComplexMatrix& m) {
  if (a.cols() != m.rows()) throw DimensionError("MatrixJet * matrix: shape mismatch");
  MatrixJet out(a.space(), a.rows(), m.cols());
  for (std::size_t k = 0; k < a.coeffs().size(); ++k) out.coeffs()[k].noalias() = a.coeffs()[k] * m;
  return out;
}

MatrixJet operator*(Complex s, MatrixJet a) { return a *= s; }

}  // namespace shilov
