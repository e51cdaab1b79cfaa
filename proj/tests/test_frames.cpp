#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "shilov/errors.hpp"
#include "shilov/frames.hpp"
#include "shilov/geometry.hpp"
#include "shilov/maurer_cartan.hpp"
#include "shilov/random.hpp"

using namespace shilov;

namespace {

ComplexMatrix random_unitary(Rng& rng, int k) {
  Eigen::HouseholderQR<ComplexMatrix> qr(rng.complex_gaussian(k, k));
  return qr.householderQ() * ComplexMatrix::Identity(k, k);
}

}  // namespace

TEST_CASE("each change family keeps the frame adapted and the point fixed") {
  SignatureForm F(4, 2);
  Rng rng(21);
  const ComplexMatrix z = sample_boundary(F, 1, 1)[0];
  const AdaptedFrame fr = build_adapted_frame(F, z);
  ComplexMatrix H = rng.complex_gaussian(2, 2);
  H = (0.5 * (H + H.adjoint())).eval();
  std::vector<FrameChange> changes{
      FrameChange::position(rng.complex_gaussian(2, 2) + 2.0 * ComplexMatrix::Identity(2, 2)),
      FrameChange::real_vectors(H),
      FrameChange::dilation(Eigen::Vector2d(0.5, 3.0)),
      FrameChange::rotation(random_unitary(rng, 2)),
      FrameChange::general_from_B(rng.complex_gaussian(2, 2)),
  };
  for (const auto& c : changes) {
    CAPTURE(to_string(c.kind));
    const AdaptedFrame out = apply_change(fr, c);
    const FrameCheck chk = check_frame(out);
    CHECK(chk.gram < 1e-11);
    CHECK(chk.det < 1e-12);
    CHECK(max_abs(point_of_frame(F, out.A) - z) < 1e-10);
  }
}

TEST_CASE("invalid payloads are rejected") {
  SignatureForm F(3, 1);
  CHECK_THROWS_AS(FrameChange::position(ComplexMatrix::Identity(1, 1), 2.0 * ComplexMatrix::Identity(1, 1)).validate(F),
                  ConstraintError);
  ComplexMatrix H(1, 1);
  H(0, 0) = Complex(0.0, 1.0);
  CHECK_THROWS_AS(FrameChange::real_vectors(H).validate(F), ConstraintError);
  CHECK_THROWS_AS(FrameChange::dilation(Eigen::VectorXd::Constant(1, -1.0)).validate(F), ConstraintError);
  CHECK_THROWS_AS(FrameChange::rotation(2.0 * ComplexMatrix::Identity(2, 2)).validate(F), ConstraintError);
  CHECK_THROWS_AS(FrameChange::rotation(ComplexMatrix::Identity(3, 3)).validate(F), DimensionError);
  const ComplexMatrix B = ComplexMatrix::Ones(1, 2);
  CHECK_THROWS_AS(FrameChange::general(ComplexMatrix::Zero(1, 1), B, -B.adjoint()).validate(F), ConstraintError);
}

TEST_CASE("raw and fixed matrices differ only by the X_1 phase") {
  SignatureForm F(3, 1);
  ComplexMatrix W(1, 1);
  W(0, 0) = std::polar(2.0, 0.7);
  const FrameChange c = FrameChange::position(W);
  const ComplexMatrix raw = c.raw_matrix(F), fixed = c.matrix(F);
  CHECK(std::abs(fixed.determinant() - 1.0) < 1e-14);
  CHECK(std::abs(std::abs(raw.determinant()) - 1.0) < 1e-14);
  CHECK(max_abs(raw.row(0) - fixed.row(0)) == 0.0);
  CHECK(max_abs(raw.row(3) - fixed.row(3)) == 0.0);
}

TEST_CASE("transformation laws for phi and theta") {
  SignatureForm F(5, 2);
  Rng rng(22);
  const int q = 2;
  const ComplexMatrix z = sample_boundary(F, 2, 1)[0];
  ChartField ch = chart_through(F, z, 2, {.gauge_seed = 5});
  const MatrixJet A = ch.frame_jet();
  const auto C = connection_from_frame_field(F, A);
  const auto phi = C.block_values(Block::phi);
  const auto theta = C.block_values(Block::theta);

  ComplexMatrix W = random_unitary(rng, q);
  W /= std::pow(W.determinant(), 1.0 / q);
  const auto Cw = connection_from_frame_field(F, apply_change(F, A, FrameChange::position(W)));
  const ComplexMatrix B = rng.complex_gaussian(q, 3);
  const auto Cg = connection_from_frame_field(F, apply_change(F, A, FrameChange::general_from_B(B)));
  for (int i = 0; i < C.num_vars(); ++i) {
    CHECK(max_abs(Cw.block_values(Block::phi)[i] - W * phi[i] * W.adjoint()) < 1e-12);
    CHECK(max_abs(Cw.block_values(Block::theta)[i] - W * theta[i]) < 1e-12);
    CHECK(max_abs(Cg.block_values(Block::phi)[i] - phi[i]) < 1e-12);
    CHECK(max_abs(Cg.block_values(Block::theta)[i] - (theta[i] - phi[i] * B)) < 1e-12);
  }
}

TEST_CASE("principal angle distance") {
  ComplexMatrix R1 = ComplexMatrix::Zero(1, 2), R2 = ComplexMatrix::Zero(1, 2);
  R1(0, 0) = 1.0;
  R2(0, 0) = 1.0;
  R2(0, 1) = 1.0;
  CHECK(row_span_distance(R1, R2) == doctest::Approx(std::sqrt(0.5)));
  CHECK(row_span_distance(R1, 3.0 * R1) < 1e-15);
}
