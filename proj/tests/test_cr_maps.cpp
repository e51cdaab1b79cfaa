#include <doctest.h>

#include "shilov/cr_maps.hpp"
#include "shilov/errors.hpp"
#include "shilov/kernels.hpp"
#include "shilov/random.hpp"

using namespace shilov;

namespace {

ComplexMatrix random_unitary(Rng& rng, int k) {
  Eigen::HouseholderQR<ComplexMatrix> qr(rng.complex_gaussian(k, k));
  return qr.householderQ() * ComplexMatrix::Identity(k, k);
}

}  // namespace

TEST_CASE("automorphisms preserve the boundary") {
  SignatureForm F(3, 2);
  const ComplexMatrix g = random_automorphism(F, 5);
  validate_automorphism(F, g, 1e-12);
  for (const auto& z : sample_boundary(F, 1, 20)) CHECK(on_boundary(F, automorphism_action(F, g, z), 1e-10));
  const ComplexMatrix z = sample_boundary(F, 2, 1)[0];
  CHECK(max_abs(automorphism_action(F, ComplexMatrix::Identity(5, 5), z) - z) < 1e-15);
  CHECK_THROWS_AS(validate_automorphism(F, 2.0 * ComplexMatrix::Identity(5, 5)), ConstraintError);
}

TEST_CASE("block unitary automorphism acts by U2 z U1^{-1}") {
  SignatureForm F(3, 2);
  Rng rng(2);
  ComplexMatrix U1 = random_unitary(rng, 2), U2 = random_unitary(rng, 3);
  ComplexMatrix g = ComplexMatrix::Zero(5, 5);
  g.topLeftCorner(2, 2) = U1;
  g.bottomRightCorner(3, 3) = U2;
  const ComplexMatrix z = sample_boundary(F, 3, 1)[0];
  CHECK(max_abs(automorphism_action(F, g, z) - U2 * z * U1.inverse()) < 1e-14);
}

TEST_CASE("builtin maps are boundary preserving and CR") {
  std::vector<std::shared_ptr<PolyMatrixMap>> maps{
      standard_embedding(3, 2, 4, 3), whitney_map(2, 1, 1, 0), whitney_map(3, 2, 1, 0), whitney_map(3, 2, 2, 1),
      default_block_diagonal_map(3, 2)};
  for (const auto& f : maps) {
    CAPTURE(f->id());
    CHECK(f->holomorphic());
    CHECK(verify_boundary_preserving(*f, sample_boundary(f->source(), 7, 200)).pass);
    for (const auto& z : sample_boundary(f->source(), 8, 3)) {
      ChartField ch = chart_through(f->source(), z, 1, {.gauge_seed = 3});
      const CRReport rep = verify_cr(*f, ch);
      CHECK(rep.pass);
      CHECK(rep.cr_residual < 1e-12);
    }
  }
}

TEST_CASE("whitney map shapes and the sphere formula") {
  auto w = whitney_map(2, 1, 1, 0);
  CHECK(w->target().p() == 3);
  CHECK(w->target().q() == 1);
  // (z1, z1 z2, z2^2)
  ComplexMatrix z(2, 1);
  z << Complex(0.3, 0.1), Complex(-0.2, 0.5);
  const ComplexMatrix v = w->evaluate(z);
  CHECK(std::abs(v(0, 0) - z(0, 0)) < 1e-15);
  CHECK(std::abs(v(1, 0) - z(0, 0) * z(1, 0)) < 1e-15);
  CHECK(std::abs(v(2, 0) - z(1, 0) * z(1, 0)) < 1e-15);
  CHECK_THROWS_AS(whitney_map(3, 2, 3, 0), ConstraintError);
}

TEST_CASE("conjugate perturbation fails CR by eps") {
  auto f = conjugate_perturbation(3, 2, 4, 3, 1e-3);
  CHECK_FALSE(f->holomorphic());
  ChartField ch = chart_through(f->source(), sample_boundary(f->source(), 4, 1)[0], 1, {.gauge_seed = 5});
  const CRReport rep = verify_cr(*f, ch);
  CHECK_FALSE(rep.pass);
  CHECK(rep.holomorphic_residual == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("scaled map fails boundary preservation by 3/4") {
  auto base = standard_embedding(2, 1, 2, 1);
  auto entries = base->entries();
  for (auto& e : entries) e.terms[0].coeff = 0.5;
  PolyMatrixMap half(base->source(), base->target(), entries);
  const BoundaryReport rep = verify_boundary_preserving(half, sample_boundary(half.source(), 1, 10));
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_residual == doctest::Approx(0.75));
}

TEST_CASE("composed map jets agree with numeric evaluation") {
  SignatureForm src(3, 2), tgt(4, 3);
  auto core = standard_embedding(3, 2, 4, 3);
  ComposedMap f(core, random_automorphism(src, 1), random_automorphism(tgt, 2));
  const ComplexMatrix z0 = sample_boundary(src, 9, 1)[0];
  ChartField ch = chart_through(src, z0, 3);
  const MatrixJet zj = point_jet_of_frame(src, ch.frame_jet());
  const MatrixJet wj = f.evaluate_jet(zj);
  std::vector<double> t(ch.num_vars(), 0.0);
  t[0] = 1e-3;
  t[3] = -2e-3;
  CHECK(max_abs(wj.evaluate(t) - f.evaluate(ch.point_at(t))) < 1e-10);
  CHECK(verify_boundary_preserving(f, sample_boundary(src, 10, 100)).pass);
  CHECK(verify_cr(f, chart_through(src, z0, 1)).pass);
}

TEST_CASE("map JSON round trip") {
  SignatureForm src(3, 2), tgt(4, 3);
  auto core = whitney_map(3, 2, 2, 1);
  auto j = map_to_json(*core);
  auto back = map_from_json(j);
  const ComplexMatrix z = sample_boundary(src, 3, 1)[0];
  CHECK(max_abs(back->evaluate(z) - core->evaluate(z)) == 0.0);

  ComposedMap composed(standard_embedding(3, 2, 4, 3), random_automorphism(src, 3), random_automorphism(tgt, 4));
  auto back2 = map_from_json(map_to_json(composed));
  CHECK(max_abs(back2->evaluate(z) - composed.evaluate(z)) < 1e-15);

  auto bad = j;
  bad["entries"][0]["terms"][0]["powers"] = {{"9,0", 1}};
  CHECK_THROWS_AS(map_from_json(bad), ConstraintError);
  auto bad2 = j;
  bad2.erase("target");
  CHECK_THROWS_AS(map_from_json(bad2), ConstraintError);
  auto bad3 = j;
  bad3["entries"][0]["row"] = 99;
  CHECK_THROWS_AS(map_from_json(bad3), ConstraintError);
}

TEST_CASE("serial and parallel boundary kernels agree") {
  auto f = whitney_map(3, 2, 2, 1);
  const auto samples = sample_boundary(f->source(), 12, 300);
  CHECK(kernels::boundary_residuals_serial(*f, samples) == kernels::boundary_residuals_parallel(*f, samples));
}
