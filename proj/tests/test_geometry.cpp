#include <doctest.h>

#include "shilov/errors.hpp"
#include "shilov/frames.hpp"
#include "shilov/geometry.hpp"
#include "shilov/maurer_cartan.hpp"
#include "shilov/random.hpp"

using namespace shilov;

TEST_CASE("signature form rejects p <= q") {
  CHECK_THROWS_AS(SignatureForm(2, 2), ConstraintError);
  CHECK_THROWS_AS(SignatureForm(3, 0), ConstraintError);
  SignatureForm F(3, 2);
  CHECK(F.n() == 1);
  CHECK(max_abs(F.S() * F.S() - ComplexMatrix::Identity(5, 5)) == 0.0);
}

TEST_CASE("reference frame is adapted") {
  for (auto [p, q] : {std::pair{2, 1}, {3, 2}, {5, 3}}) {
    SignatureForm F(p, q);
    CHECK(is_frame_group_element(F, reference_frame(F), 1e-13));
  }
}

TEST_CASE("boundary samples are on the boundary") {
  SignatureForm F(4, 2);
  for (const auto& z : sample_boundary(F, 3, 50)) {
    CHECK(on_boundary(F, z, 1e-13));
    CHECK_FALSE(in_domain(F, z, 1e-12));
    CHECK(in_closed_domain(F, z));
  }
  CHECK(in_domain(F, ComplexMatrix::Zero(4, 2)));
}

TEST_CASE("adapted frames at random boundary points") {
  for (auto [p, q] : {std::pair{2, 1}, {3, 2}, {4, 2}, {5, 3}}) {
    SignatureForm F(p, q);
    for (const auto& z : sample_boundary(F, 100 + p, 20)) {
      const AdaptedFrame fr = build_adapted_frame(F, z);
      const FrameCheck c = check_frame(fr);
      CHECK(c.gram < 1e-12);
      CHECK(c.det < 1e-12);
      CHECK(max_abs(point_of_frame(F, fr.A) - z) < 1e-12);
    }
  }
  SignatureForm F(3, 2);
  CHECK_THROWS_AS(build_adapted_frame(F, ComplexMatrix::Zero(3, 2)), ConstraintError);
}

TEST_CASE("transversal and stabilizer bases lie in the algebra and span the right dimensions") {
  for (auto [p, q] : {std::pair{2, 1}, {3, 2}, {5, 3}}) {
    SignatureForm F(p, q);
    const int n = p - q;
    auto T = transversal_basis(F);
    auto K = stabilizer_basis(F);
    CHECK(static_cast<int>(T.size()) == transversal_dim(F));
    CHECK(static_cast<int>(K.size()) == n * n + 2 * n * q + 3 * q * q - 1);
    // together a real basis of the (p+q)^2 - 1 dimensional algebra
    Eigen::MatrixXd R(2 * F.dim() * F.dim(), T.size() + K.size());
    int col = 0;
    for (const auto* set : {&T, &K})
      for (const auto& E : *set) {
        CHECK(in_frame_algebra(F, E, 1e-14));
        Eigen::Map<const Eigen::VectorXcd> v(E.data(), E.size());
        R.col(col) << v.real(), v.imag();
        ++col;
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
    CHECK(lu.rank() == F.dim() * F.dim() - 1);
  }
}

TEST_CASE("stabilizer gauge leaves the point map unchanged") {
  SignatureForm F(3, 2);
  const ComplexMatrix z0 = sample_boundary(F, 5, 1)[0];
  ChartField plain = chart_through(F, z0, 3);
  ChartField gauged = chart_through(F, z0, 3, {.gauge_seed = 77});
  Rng rng(6);
  std::vector<double> t(plain.num_vars());
  for (auto& x : t) x = 0.1 * rng.normal();
  CHECK(max_abs(plain.point_at(t) - gauged.point_at(t)) < 1e-12);
  CHECK(on_boundary(F, gauged.point_at(t), 1e-12));
  CHECK(max_abs(gauged.frame_at(t) - plain.frame_at(t)) > 1e-3);
  CHECK(point_map_rank(gauged) == 2 * 3 * 2 - 2 * 2);  // real dim of S_{3,2} is 2pq - q^2
}

TEST_CASE("chart jets agree with the dense evaluation") {
  SignatureForm F(4, 2);
  const ComplexMatrix z0 = sample_boundary(F, 8, 1)[0];
  ChartField ch = chart_through(F, z0, 5, {.gauge_seed = 3});
  const MatrixJet A = ch.frame_jet();
  std::vector<double> t(ch.num_vars(), 0.0);
  Rng rng(1);
  for (auto& x : t) x = 1e-2 * rng.normal();
  // truncation error is O(|t|^6)
  CHECK(max_abs(A.evaluate(t) - ch.frame_at(t)) < 1e-9);
}

TEST_CASE("chart directions outside the algebra are rejected") {
  SignatureForm F(3, 2);
  const ComplexMatrix z0 = sample_boundary(F, 9, 1)[0];
  std::vector<ComplexMatrix> dirs{ComplexMatrix::Identity(5, 5)};
  CHECK_THROWS_AS(chart_from_directions(F, z0, dirs, 2), ConstraintError);
}

TEST_CASE("CR tangent data has the expected dimensions") {
  SignatureForm F(5, 3);
  ChartField ch = chart_through(F, sample_boundary(F, 2, 1)[0], 2, {.gauge_seed = 4});
  const CRTangentData cr = cr_tangent_basis(ch);
  CHECK(cr.cr_basis.cols() == 2 * 2 * 3);
  CHECK(cr.contact_basis.cols() == 9);
  const Eigen::MatrixXd J2 = cr.complex_structure * cr.complex_structure;
  CHECK((J2 + Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
}
