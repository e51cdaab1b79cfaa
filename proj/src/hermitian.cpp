#include "shilov/hermitian.hpp"

#include <cmath>
#include <string>

#include "shilov/errors.hpp"

namespace shilov {

SignatureForm::SignatureForm(int p, int q) : p_(p), q_(q) {
  if (q < 1 || p <= q)
    throw ConstraintError("signature requires p > q >= 1, got p=" + std::to_string(p) +
                          " q=" + std::to_string(q));
  const int N = p + q;
  J_ = ComplexMatrix::Identity(N, N);
  J_.topLeftCorner(q, q) *= -1.0;
  S_ = ComplexMatrix::Zero(N, N);
  S_.block(0, q + n(), q, q).setIdentity();
  S_.block(q + n(), 0, q, q).setIdentity();
  S_.block(q, q, n(), n()).setIdentity();
}

Complex form_value(const SignatureForm& F, const ComplexVector& u, const ComplexVector& v) {
  if (u.size() != F.dim() || v.size() != F.dim())
    throw DimensionError("form_value: vectors must have length p+q");
  Complex acc = 0.0;
  for (int i = 0; i < F.dim(); ++i) {
    const Complex t = u(i) * std::conj(v(i));
    acc += i < F.q() ? -t : t;
  }
  return acc;
}

ComplexMatrix gram_matrix(const SignatureForm& F, const ComplexMatrix& A) {
  require_shape(A, F.dim(), F.dim(), "gram_matrix");
  return A * F.J() * A.adjoint();
}

ComplexMatrix reference_frame(const SignatureForm& F) {
  const int q = F.q();
  const int n = F.n();
  const int N = F.dim();
  const double s = M_SQRT1_2;
  ComplexMatrix A = ComplexMatrix::Zero(N, N);
  for (int a = 0; a < q; ++a) {
    A(a, a) = s;
    A(a, q + n + a) = s;
    A(q + n + a, a) = -s;
    A(q + n + a, q + n + a) = s;
  }
  for (int j = 0; j < n; ++j) A(q + j, q + j) = 1.0;
  fix_determinant_phase(F, A);
  return A;
}

bool is_frame_group_element(const SignatureForm& F, const ComplexMatrix& A, double tol) {
  require_shape(A, F.dim(), F.dim(), "is_frame_group_element");
  if (max_abs(gram_matrix(F, A) - F.S()) > tol) return false;
  return std::abs(A.determinant() - 1.0) <= tol;
}

void fix_determinant_phase(const SignatureForm& F, ComplexMatrix& A) {
  const Complex det = A.determinant();
  if (std::abs(det) == 0.0) throw NumericError("fix_determinant_phase: singular frame");
  A.row(F.x_begin()) *= std::polar(1.0, -std::arg(det));
}

double max_abs(const ComplexMatrix& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

void require_shape(const ComplexMatrix& M, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (M.rows() != rows || M.cols() != cols)
    throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(M.rows()) + "x" +
                         std::to_string(M.cols()));
}

void require_finite(const ComplexMatrix& M, const char* what) {
  if (!M.allFinite()) throw ConstraintError(std::string(what) + ": non-finite entry");
}

}  // namespace shilov
