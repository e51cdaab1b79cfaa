#pragma once

#include <complex>

#include <Eigen/Dense>

namespace shilov {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Default threshold for identities that hold exactly on double-precision inputs.
inline constexpr double kExactTol = 1e-10;

/// The Hermitian pairing of signature (p, q) on C^{p+q}.
///
/// In coordinates the pairing is <u, v> = -sum_{i<q} u_i conj(v_i) + sum_{i>=q} u_i conj(v_i),
/// with Gram matrix J = diag(-I_q, I_p). Adapted frames are stored with their
/// vectors as rows, ordered (Z_1..Z_q, X_1..X_n, Y_1..Y_q), and have Gram matrix
///
///        [ 0   0   I_q ]
///   S =  [ 0   I_n  0  ]
///        [ I_q 0   0   ]
class SignatureForm {
 public:
  SignatureForm(int p, int q);

  int p() const { return p_; }
  int q() const { return q_; }
  int n() const { return p_ - q_; }
  int dim() const { return p_ + q_; }

  /// Row offsets of the Z, X and Y blocks inside a frame.
  int z_begin() const { return 0; }
  int x_begin() const { return q_; }
  int y_begin() const { return q_ + n(); }

  const ComplexMatrix& J() const { return J_; }
  const ComplexMatrix& S() const { return S_; }

  friend bool operator==(const SignatureForm& a, const SignatureForm& b) {
    return a.p_ == b.p_ && a.q_ == b.q_;
  }

 private:
  int p_;
  int q_;
  ComplexMatrix J_;
  ComplexMatrix S_;
};

Complex form_value(const SignatureForm& F, const ComplexVector& u, const ComplexVector& v);

/// G[L][M] = <row_L(A), row_M(A)>, i.e. G = A J A^*.
ComplexMatrix gram_matrix(const SignatureForm& F, const ComplexMatrix& A);

/// Explicit adapted frame at z0 = [0_{n x q}; I_q] with det = 1.
ComplexMatrix reference_frame(const SignatureForm& F);

/// True iff A J A^* = S and det A = 1, both within tol.
bool is_frame_group_element(const SignatureForm& F, const ComplexMatrix& A, double tol = kExactTol);

/// Rescales row X_1 by a unit complex number so that det A becomes real positive.
/// Every Gram entry is preserved by a phase on a single X row.
void fix_determinant_phase(const SignatureForm& F, ComplexMatrix& A);

double max_abs(const ComplexMatrix& M);

/// Throws DimensionError unless M is rows x cols.
void require_shape(const ComplexMatrix& M, Eigen::Index rows, Eigen::Index cols, const char* what);

/// Throws ConstraintError if any entry is NaN or infinite.
void require_finite(const ComplexMatrix& M, const char* what);

}  // namespace shilov
