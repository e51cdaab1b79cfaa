#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "shilov/hermitian.hpp"

namespace shilov {

/// Indexing of the monomials t^e with |e| <= order in m real variables.
///
/// Monomials are stored in graded-lexicographic order: degree 0, then the m
/// degree-one monomials t_0..t_{m-1}, then degree two, and so on. The order
/// inside each degree does not depend on the truncation order, so the
/// monomials of a lower order form a prefix of those of a higher one and
/// truncation is a resize.
class JetSpace {
 public:
  static constexpr int kMaxOrder = 7;

  /// Shared, cached instance.
  static std::shared_ptr<const JetSpace> get(int num_vars, int order);

  JetSpace(int num_vars, int order);

  int num_vars() const { return num_vars_; }
  int order() const { return order_; }
  std::size_t size() const { return degree_.size(); }
  int degree(std::size_t idx) const { return degree_[idx]; }
  /// First index of degree d; degree_begin(order()+1) == size().
  std::size_t degree_begin(int d) const { return degree_begin_[d]; }
  /// Number of monomials of degree <= d.
  std::size_t count_upto(int d) const { return degree_begin_[d + 1]; }

  /// Sorted variable indices of the monomial (one entry per power).
  std::span<const std::uint8_t> variables(std::size_t idx) const {
    return {vars_[idx].data(), static_cast<std::size_t>(degree_[idx])};
  }
  /// Exponent vector of length num_vars().
  std::vector<int> exponents(std::size_t idx) const;
  std::size_t index_of(std::span<const int> exponents) const;
  std::size_t var_index(int v) const { return 1 + static_cast<std::size_t>(v); }

  struct MulEntry {
    std::uint32_t a, b, out;
  };
  /// All (a, b) with deg a + deg b <= order, ordered by out.
  const std::vector<MulEntry>& mul_table() const { return mul_; }
  /// mul_table() entries for output index o are [mul_offsets()[o], mul_offsets()[o+1]).
  const std::vector<std::uint32_t>& mul_offsets() const { return mul_offsets_; }

  struct DerivEntry {
    std::uint32_t src, dst;
    double factor;
  };
  /// d/dt_v: src (degree >= 1) maps to dst with the exponent as factor.
  const std::vector<DerivEntry>& derivative_table(int v) const { return deriv_[v]; }

  double monomial_value(std::size_t idx, std::span<const double> t) const;

 private:
  std::uint64_t key(std::span<const std::uint8_t> sorted_vars) const;
  std::size_t lookup(std::span<const std::uint8_t> sorted_vars) const;

  int num_vars_;
  int order_;
  std::vector<int> degree_;
  std::vector<std::array<std::uint8_t, kMaxOrder>> vars_;
  std::vector<std::size_t> degree_begin_;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> sorted_keys_;
  std::vector<MulEntry> mul_;
  std::vector<std::uint32_t> mul_offsets_;
  std::vector<std::vector<DerivEntry>> deriv_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

/// Truncated Taylor series in real parameters with complex coefficients.
class Jet {
 public:
  explicit Jet(JetSpacePtr space);
  Jet(JetSpacePtr space, std::vector<Complex> coeffs);

  static Jet constant(JetSpacePtr space, Complex value);
  static Jet variable(JetSpacePtr space, int v);

  const JetSpacePtr& space() const { return space_; }
  int num_vars() const { return space_->num_vars(); }
  int order() const { return space_->order(); }
  std::size_t size() const { return coeffs_.size(); }

  const std::vector<Complex>& coeffs() const { return coeffs_; }
  std::vector<Complex>& coeffs() { return coeffs_; }
  Complex operator[](std::size_t i) const { return coeffs_[i]; }
  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  Complex constant_term() const { return coeffs_[0]; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(Complex s);
  Jet operator-() const;

  Jet conj() const;
  Jet inverse() const;
  Jet derivative(int v) const;
  Jet truncated(int order) const;
  Complex evaluate(std::span<const double> t) const;
  double max_abs() const;

 private:
  JetSpacePtr space_;
  std::vector<Complex> coeffs_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(Complex s, Jet a);

enum class JetOp { add, sub, mul };
Jet jet_arith(const Jet& a, const Jet& b, JetOp op);
Jet jet_inverse(const Jet& a);
Jet jet_conj(const Jet& a);

/// Degree 0, 1 or 2 differential form on R^m with jet coefficients.
///
/// Degree-1 components are the coefficients of dt_i; degree-2 components are
/// the coefficients of dt_i ^ dt_j for i < j, in row-major pair order.
class ExteriorForm {
 public:
  ExteriorForm(int degree, JetSpacePtr space);

  static ExteriorForm function(Jet f);
  /// The 1-form dt_v.
  static ExteriorForm coordinate_differential(JetSpacePtr space, int v);

  int degree() const { return degree_; }
  int num_vars() const { return space_->num_vars(); }
  int order() const { return space_->order(); }
  const JetSpacePtr& space() const { return space_; }

  std::size_t num_components() const { return components_.size(); }
  const Jet& component(std::size_t i) const { return components_[i]; }
  Jet& component(std::size_t i) { return components_[i]; }

  static std::size_t num_pairs(int m) { return static_cast<std::size_t>(m) * (m - 1) / 2; }
  static std::size_t pair_index(int i, int j, int m);

  ExteriorForm& operator+=(const ExteriorForm& o);
  ExteriorForm& operator-=(const ExteriorForm& o);
  ExteriorForm truncated(int order) const;
  double max_abs() const;

 private:
  int degree_;
  JetSpacePtr space_;
  std::vector<Jet> components_;
};

ExteriorForm operator+(ExteriorForm a, const ExteriorForm& b);
ExteriorForm operator-(ExteriorForm a, const ExteriorForm& b);
/// Multiplication by a function.
ExteriorForm operator*(const Jet& f, const ExteriorForm& a);

ExteriorForm wedge(const ExteriorForm& a, const ExteriorForm& b);
/// Component jets drop one order.
ExteriorForm exterior_d(const ExteriorForm& a);
std::vector<Complex> evaluate_at_origin(const ExteriorForm& a);

/// Truncated Taylor series with matrix coefficients: one Eigen matrix per monomial.
///
/// Frame fields, their inverses and connection components are stored this way
/// so that jet products become sums of small dense products.
class MatrixJet {
 public:
  MatrixJet(JetSpacePtr space, Eigen::Index rows, Eigen::Index cols);

  static MatrixJet constant(JetSpacePtr space, const ComplexMatrix& value);
  static MatrixJet from_entries(Eigen::Index rows, Eigen::Index cols, const std::vector<Jet>& entries);

  const JetSpacePtr& space() const { return space_; }
  int num_vars() const { return space_->num_vars(); }
  int order() const { return space_->order(); }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  const std::vector<ComplexMatrix>& coeffs() const { return coeffs_; }
  std::vector<ComplexMatrix>& coeffs() { return coeffs_; }
  const ComplexMatrix& value() const { return coeffs_[0]; }

  Jet entry(Eigen::Index i, Eigen::Index j) const;
  void set_entry(Eigen::Index i, Eigen::Index j, const Jet& v);
  MatrixJet block(Eigen::Index r, Eigen::Index c, Eigen::Index nr, Eigen::Index nc) const;
  void set_block(Eigen::Index r, Eigen::Index c, const MatrixJet& b);

  MatrixJet adjoint() const;
  MatrixJet transpose() const;
  MatrixJet derivative(int v) const;
  MatrixJet truncated(int order) const;
  ComplexMatrix evaluate(std::span<const double> t) const;
  double max_abs() const;
  /// Largest coefficient magnitude among monomials of exactly degree d.
  double max_abs_degree(int d) const;

  MatrixJet& operator+=(const MatrixJet& o);
  MatrixJet& operator-=(const MatrixJet& o);
  MatrixJet& operator*=(Complex s);

  /// Requires an invertible constant term.
  MatrixJet inverse() const;
  /// exp of a jet with zero constant term, exact at truncation order.
  static MatrixJet exp_nilpotent(const MatrixJet& X);

 private:
  JetSpacePtr space_;
  Eigen::Index rows_;
  Eigen::Index cols_;
  std::vector<ComplexMatrix> coeffs_;
};

MatrixJet operator+(MatrixJet a, const MatrixJet& b);
MatrixJet operator-(MatrixJet a, const MatrixJet& b);
MatrixJet operator*(const MatrixJet& a, const MatrixJet& b);
MatrixJet operator*(const ComplexMatrix& m, const MatrixJet& a);
MatrixJet operator*(const MatrixJet& a, const ComplexMatrix& m);
MatrixJet operator*(Complex s, MatrixJet a);

}  // namespace shilov
