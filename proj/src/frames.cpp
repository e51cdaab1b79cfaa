#include "shilov/frames.hpp"

#include <cmath>

#include "shilov/errors.hpp"
#include "shilov/geometry.hpp"

namespace shilov {

namespace {

// Pairing matrix <rows(U)_a, rows(V)_b> = U J V^*.
ComplexMatrix pairing(const SignatureForm& F, const ComplexMatrix& U, const ComplexMatrix& V) {
  return U * F.J() * V.adjoint();
}

double scale_of(const ComplexMatrix& M) { return std::max(1.0, max_abs(M)); }

}  // namespace

AdaptedFrame build_adapted_frame(const SignatureForm& F, const ComplexMatrix& z, double tol) {
  require_shape(z, F.p(), F.q(), "build_adapted_frame");
  require_finite(z, "build_adapted_frame");
  const int q = F.q(), n = F.n(), N = F.dim();

  // (a) Z rows from the lift.
  const ComplexMatrix Z = lift(z).transpose();
  if (max_abs(pairing(F, Z, Z)) > tol)
    throw ConstraintError("build_adapted_frame: point is off the boundary (Z rows not null)");

  // (b) Y' dual to Z, seeded by the J-image of the Z rows.
  ComplexMatrix seeds = Z * F.J();
  ComplexMatrix P = pairing(F, Z, seeds);
  Eigen::JacobiSVD<ComplexMatrix> svd(P);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) == 0.0 || sv(0) / sv(sv.size() - 1) > 1e8) {
    // Pivoted choice of standard basis vectors with the best pairing.
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(Z * F.J());
    seeds = ComplexMatrix::Zero(q, N);
    for (int a = 0; a < q; ++a) seeds(a, qr.colsPermutation().indices()(a)) = 1.0;
    P = pairing(F, Z, seeds);
  }
  // <Z_a, (M s)_b> = (P M^*)_{ab} = delta  =>  M = P^{-*}.
  const ComplexMatrix Yp = P.adjoint().fullPivLu().inverse() * seeds;

  // (c) null correction.
  const ComplexMatrix G = pairing(F, Yp, Yp);
  const ComplexMatrix Y = Yp - 0.5 * G * Z;

  // (d) X from the form-orthogonal complement of span(Z, Y).
  const ComplexMatrix Id = ComplexMatrix::Identity(N, N);
  const ComplexMatrix proj = Id - pairing(F, Id, Y) * Z - pairing(F, Id, Z) * Y;
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(proj.transpose());
  ComplexMatrix X(n, N);
  for (int j = 0; j < n; ++j) X.row(j) = proj.row(qr.colsPermutation().indices()(j));
  const ComplexMatrix GX = pairing(F, X, X);
  Eigen::LLT<ComplexMatrix> llt(0.5 * (GX + GX.adjoint()));
  if (llt.info() != Eigen::Success) throw NumericError("build_adapted_frame: complement is not positive definite");
  X = llt.matrixL().solve(X);

  AdaptedFrame out{F, ComplexMatrix(N, N)};
  out.A << Z, X, Y;
  // (e)
  fix_determinant_phase(F, out.A);
  return out;
}

FrameCheck check_frame(const AdaptedFrame& frame) {
  FrameCheck c;
  c.gram = max_abs(gram_matrix(frame.F, frame.A) - frame.F.S());
  c.det = std::abs(frame.A.determinant() - 1.0);
  return c;
}

std::string to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::position: return "position";
    case ChangeKind::real_vectors: return "real_vectors";
    case ChangeKind::dilation: return "dilation";
    case ChangeKind::rotation: return "rotation";
    case ChangeKind::general: return "general";
  }
  return "unknown";
}

FrameChange FrameChange::position(ComplexMatrix W, ComplexMatrix V) {
  FrameChange c;
  c.kind = ChangeKind::position;
  c.W = std::move(W);
  c.V = std::move(V);
  return c;
}

FrameChange FrameChange::position(const ComplexMatrix& W) {
  Eigen::FullPivLU<ComplexMatrix> lu(W);
  if (!lu.isInvertible()) throw ConstraintError("position change: W must be invertible");
  return position(W, lu.inverse().adjoint());
}

FrameChange FrameChange::real_vectors(ComplexMatrix H) {
  FrameChange c;
  c.kind = ChangeKind::real_vectors;
  c.H = std::move(H);
  return c;
}

FrameChange FrameChange::dilation(Eigen::VectorXd lambda) {
  FrameChange c;
  c.kind = ChangeKind::dilation;
  c.lambda = std::move(lambda);
  return c;
}

FrameChange FrameChange::rotation(ComplexMatrix U) {
  FrameChange c;
  c.kind = ChangeKind::rotation;
  c.U = std::move(U);
  return c;
}

FrameChange FrameChange::general(ComplexMatrix A, ComplexMatrix B, ComplexMatrix C) {
  FrameChange c;
  c.kind = ChangeKind::general;
  c.A = std::move(A);
  c.B = std::move(B);
  c.C = std::move(C);
  return c;
}

FrameChange FrameChange::general_from_B(const ComplexMatrix& B) {
  return general(solve_general_change_A(B), B, -B.adjoint());
}

void FrameChange::validate(const SignatureForm& F, double tol) const {
  const int q = F.q(), n = F.n();
  switch (kind) {
    case ChangeKind::position:
      require_shape(W, q, q, "position change W");
      require_shape(V, q, q, "position change V");
      if (max_abs(V.adjoint() * W - ComplexMatrix::Identity(q, q)) > tol * scale_of(V) * scale_of(W))
        throw ConstraintError("position change: V^* W != I");
      return;
    case ChangeKind::real_vectors:
      require_shape(H, q, q, "real vector change H");
      if (max_abs(H - H.adjoint()) > tol * scale_of(H)) throw ConstraintError("real vector change: H is not Hermitian");
      return;
    case ChangeKind::dilation:
      if (lambda.size() != q) throw DimensionError("dilation: need q factors");
      for (Eigen::Index a = 0; a < q; ++a)
        if (!(lambda(a) > 0.0) || !std::isfinite(lambda(a))) throw ConstraintError("dilation: factors must be positive");
      return;
    case ChangeKind::rotation:
      require_shape(U, n, n, "rotation U");
      if (max_abs(U.adjoint() * U - ComplexMatrix::Identity(n, n)) > tol) throw ConstraintError("rotation: U is not unitary");
      return;
    case ChangeKind::general: {
      require_shape(A, q, q, "general change A");
      require_shape(B, q, n, "general change B");
      require_shape(C, n, q, "general change C");
      const double s = scale_of(B) * scale_of(B) + scale_of(A);
      if (max_abs(C + B.adjoint()) > tol * scale_of(B)) throw ConstraintError("general change: C + B^* != 0");
      if (max_abs(A + A.adjoint() + B * B.adjoint()) > tol * s)
        throw ConstraintError("general change: (A + A^*) + B B^* != 0");
      return;
    }
  }
}

ComplexMatrix FrameChange::raw_matrix(const SignatureForm& F) const {
  validate(F);
  const int q = F.q(), n = F.n(), N = F.dim();
  const int x0 = F.x_begin(), y0 = F.y_begin();
  ComplexMatrix M = ComplexMatrix::Identity(N, N);
  switch (kind) {
    case ChangeKind::position:
      M.block(0, 0, q, q) = W;
      M.block(y0, y0, q, q) = V;
      break;
    case ChangeKind::real_vectors:
      M.block(y0, 0, q, q) = Complex(0.0, 1.0) * H;
      break;
    case ChangeKind::dilation:
      for (int a = 0; a < q; ++a) {
        M(a, a) = 1.0 / lambda(a);
        M(y0 + a, y0 + a) = lambda(a);
      }
      break;
    case ChangeKind::rotation:
      M.block(x0, x0, n, n) = U;
      break;
    case ChangeKind::general:
      M.block(x0, 0, n, q) = C;
      M.block(y0, 0, q, q) = A;
      M.block(y0, x0, q, n) = B;
      break;
  }
  return M;
}

ComplexMatrix FrameChange::matrix(const SignatureForm& F) const {
  ComplexMatrix M = raw_matrix(F);
  const Complex det = M.determinant();
  if (F.n() > 0 && std::abs(det - 1.0) > 1e-14) M.row(F.x_begin()) *= std::polar(1.0, -std::arg(det));
  return M;
}

AdaptedFrame apply_change(const AdaptedFrame& frame, const FrameChange& change) {
  return AdaptedFrame{frame.F, change.matrix(frame.F) * frame.A};
}

MatrixJet apply_change(const SignatureForm& F, const MatrixJet& A, const FrameChange& change) {
  return change.matrix(F) * A;
}

ComplexMatrix solve_general_change_A(const ComplexMatrix& B) { return -0.5 * B * B.adjoint(); }

double row_span_distance(const ComplexMatrix& R1, const ComplexMatrix& R2) {
  if (R1.cols() != R2.cols()) throw DimensionError("row_span_distance: column mismatch");
  const ComplexMatrix Q1 = Eigen::HouseholderQR<ComplexMatrix>(R1.transpose()).householderQ() *
                           ComplexMatrix::Identity(R1.cols(), R1.rows());
  const ComplexMatrix Q2 = Eigen::HouseholderQR<ComplexMatrix>(R2.transpose()).householderQ() *
                           ComplexMatrix::Identity(R2.cols(), R2.rows());
  // sine of the largest principal angle = || (I - Q2 Q2^*) Q1 ||_2
  const ComplexMatrix resid = Q1 - Q2 * (Q2.adjoint() * Q1);
  Eigen::JacobiSVD<ComplexMatrix> svd(resid);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace shilov
