#pragma once

#include <string>

#include <Eigen/Dense>

#include "shilov/hermitian.hpp"
#include "shilov/jet.hpp"

namespace shilov {

struct AdaptedFrame {
  SignatureForm F;
  ComplexMatrix A;
};

/// Adapted frame at a boundary point: Z rows are the columns of (I_q over z),
/// Y rows are null and dual to Z, X rows are an orthonormal complement, det = 1.
/// Throws ConstraintError if z is off the boundary by more than tol.
AdaptedFrame build_adapted_frame(const SignatureForm& F, const ComplexMatrix& z, double tol = kExactTol);

/// Residuals of an adapted frame.
struct FrameCheck {
  double gram = 0.0;  // ||A J A^* - S||_max
  double det = 0.0;   // |det A - 1|
};
FrameCheck check_frame(const AdaptedFrame& frame);

enum class ChangeKind { position, real_vectors, dilation, rotation, general };
std::string to_string(ChangeKind kind);

/// A frame change stored by its payload; matrix() gives the left factor U with
/// (Z~, X~, Y~) = U (Z, X, Y).
struct FrameChange {
  ChangeKind kind = ChangeKind::position;
  ComplexMatrix W, V;      // position: Z~ = W Z, Y~ = V Y, V^* W = I
  ComplexMatrix H;         // real_vectors: Y~ = Y + i H Z, H Hermitian
  Eigen::VectorXd lambda;  // dilation: Z~ = Z / lambda, Y~ = lambda Y
  ComplexMatrix U;         // rotation: X~ = U X, U unitary
  ComplexMatrix A, B, C;   // general: X~ = X + C Z, Y~ = Y + A Z + B X

  static FrameChange position(ComplexMatrix W, ComplexMatrix V);
  /// V = W^{-*}.
  static FrameChange position(const ComplexMatrix& W);
  static FrameChange real_vectors(ComplexMatrix H);
  static FrameChange dilation(Eigen::VectorXd lambda);
  static FrameChange rotation(ComplexMatrix U);
  static FrameChange general(ComplexMatrix A, ComplexMatrix B, ComplexMatrix C);
  /// C = -B^*, A from solve_general_change_A.
  static FrameChange general_from_B(const ComplexMatrix& B);

  /// Throws DimensionError or ConstraintError if the payload is invalid for F.
  void validate(const SignatureForm& F, double tol = kExactTol) const;
  /// Left factor with det 1 (a phase on the X_1 row absorbs any unit determinant).
  ComplexMatrix matrix(const SignatureForm& F) const;
  /// The same factor without the determinant fix, for composing several changes.
  ComplexMatrix raw_matrix(const SignatureForm& F) const;
};

AdaptedFrame apply_change(const AdaptedFrame& frame, const FrameChange& change);
/// Same change applied to a frame field.
MatrixJet apply_change(const SignatureForm& F, const MatrixJet& A, const FrameChange& change);

/// A = -1/2 B B^*, the Hermitian solution of (A + A^*) + B B^* = 0.
ComplexMatrix solve_general_change_A(const ComplexMatrix& B);

/// Largest principal-angle sine between the row spans of two q x N blocks.
double row_span_distance(const ComplexMatrix& R1, const ComplexMatrix& R2);

}  // namespace shilov
