#include <doctest.h>

#include "shilov/errors.hpp"
#include "shilov/geometry.hpp"
#include "shilov/kernels.hpp"
#include "shilov/maurer_cartan.hpp"
#include "shilov/random.hpp"

using namespace shilov;

TEST_CASE("constant frame has zero connection") {
  SignatureForm F(3, 2);
  const auto C = connection_from_frame(F, reference_frame(F), 3, 2);
  for (const auto& c : C.components) CHECK(c.max_abs() == 0.0);
}

TEST_CASE("one-parameter subgroup gives a constant connection") {
  SignatureForm F(3, 1);
  const ComplexMatrix z0 = sample_boundary(F, 1, 1)[0];
  auto dirs = transversal_basis(F);
  ChartField ch = chart_from_directions(F, z0, {dirs[1]}, 5);
  const auto C = connection_from_frame_field(ch);
  CHECK(max_abs(C.components[0].value() - dirs[1]) < 1e-14);
  for (std::size_t k = 1; k < C.components[0].coeffs().size(); ++k) CHECK(max_abs(C.components[0].coeffs()[k]) < 1e-13);
}

TEST_CASE("structure equations, symmetry and trace on gauged charts") {
  for (auto [p, q] : {std::pair{2, 1}, {3, 2}}) {
    SignatureForm F(p, q);
    for (const auto& z : sample_boundary(F, 40 + p, 3)) {
      ChartField ch = chart_through(F, z, 3, {.gauge_seed = 9});
      const auto C = connection_from_frame_field(ch);
      const StructureReport rep = check_structure_equations(C);
      CHECK(rep.pass);
      CHECK(rep.total < 1e-10);
      CHECK(rep.symmetry < 1e-10);
      CHECK(rep.trace < 1e-12);
      // the gauge makes the second-order terms nontrivial
      CHECK(C.components[0].max_abs_degree(1) > 1e-3);
    }
  }
}

TEST_CASE("perturbing one entry is detected") {
  SignatureForm F(3, 2);
  ChartField ch = chart_through(F, sample_boundary(F, 3, 1)[0], 3, {.gauge_seed = 2});
  auto C = connection_from_frame_field(ch);
  C.components[1].coeffs()[C.components[1].space()->var_index(0)](0, 1) += 1e-3;
  const StructureReport rep = check_structure_equations(C);
  CHECK_FALSE(rep.pass);
  CHECK(rep.total >= 1e-4);
}

TEST_CASE("serial and parallel structure kernels agree") {
  SignatureForm F(3, 2);
  ChartField ch = chart_through(F, sample_boundary(F, 4, 1)[0], 3, {.gauge_seed = 8});
  const auto C = connection_from_frame_field(ch);
  const double s = kernels::structure_residual_serial(C.components);
  const double p = kernels::structure_residual_parallel(C.components);
  CHECK(s < 1e-10);
  CHECK(p < 1e-10);
  CHECK(check_structure_equations(C).total == doctest::Approx(p).epsilon(1e-3));
}

TEST_CASE("structure check needs order two frames") {
  SignatureForm F(2, 1);
  ChartField ch = chart_through(F, sample_boundary(F, 5, 1)[0], 1);
  CHECK_THROWS_AS(check_structure_equations(connection_from_frame_field(ch)), JetOrderError);
}

TEST_CASE("contact forms: d phi = theta ^ theta_xy modulo phi") {
  for (auto [p, q] : {std::pair{2, 1}, {3, 2}, {4, 2}}) {
    SignatureForm F(p, q);
    ChartField ch = chart_through(F, sample_boundary(F, 6, 1)[0], 2, {.gauge_seed = 12});
    CHECK(contact_modulo_reduction(connection_from_frame_field(ch)) < 1e-10);
  }
  SignatureForm F(3, 2);
  CHECK(contact_modulo_reduction(connection_from_frame(F, reference_frame(F), 4, 2)) == 0.0);
}

TEST_CASE("point basis decomposition round trip") {
  SignatureForm F(4, 2);
  ChartField ch = chart_through(F, sample_boundary(F, 7, 1)[0], 1, {.gauge_seed = 13});
  const auto C = connection_from_frame_field(ch);
  const ComplexMatrix B = point_basis(C);
  CHECK(B.rows() == B.cols());
  Rng rng(3);
  const Eigen::VectorXcd coef = rng.complex_gaussian(B.rows(), 1);
  const Decomposition d = point_basis_decompose(coef.transpose() * B, B);
  CHECK(max_abs(d.coefficients - coef) < 1e-10);
  CHECK(d.residual < 1e-12);

  const Decomposition self = point_basis_decompose(B.row(point_basis_phi(F, 0, 0)), B);
  CHECK(std::abs(self.coefficients(point_basis_phi(F, 0, 0)) - 1.0) < 1e-12);

  ComplexMatrix degenerate = B;
  degenerate.row(1) = degenerate.row(0);
  CHECK_THROWS_AS(point_basis_decompose(B.row(0), degenerate), NumericError);
}
