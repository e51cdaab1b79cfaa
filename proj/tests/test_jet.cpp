#include <doctest.h>

#include <cmath>

#include "shilov/errors.hpp"
#include "shilov/jet.hpp"
#include "shilov/random.hpp"

using namespace shilov;

namespace {

Jet random_jet(const JetSpacePtr& s, Rng& rng) {
  Jet j(s);
  for (auto& c : j.coeffs()) c = rng.complex_normal();
  return j;
}

}  // namespace

TEST_CASE("monomial indexing is graded and truncation is a prefix") {
  auto s3 = JetSpace::get(3, 3);
  auto s2 = JetSpace::get(3, 2);
  CHECK(s3->size() == 20);  // C(6,3)
  CHECK(s2->size() == 10);
  for (std::size_t i = 0; i < s2->size(); ++i) {
    CHECK(s2->exponents(i) == s3->exponents(i));
    CHECK(s3->index_of(s3->exponents(i)) == i);
  }
  CHECK(s3->degree_begin(2) == 4);
  CHECK(s3->var_index(1) == 2);
}

TEST_CASE("jet product matches polynomial multiplication") {
  auto s = JetSpace::get(2, 3);
  // (1 + t0) * (1 - t1) = 1 + t0 - t1 - t0 t1
  Jet a = Jet::constant(s, 1.0) + Jet::variable(s, 0);
  Jet b = Jet::constant(s, 1.0) - Jet::variable(s, 1);
  Jet c = a * b;
  const int e01[2] = {1, 1};
  CHECK(std::abs(c[s->index_of(e01)] + 1.0) == doctest::Approx(0.0));
  const double t[2] = {0.3, -0.2};
  CHECK(std::abs(c.evaluate(t) - (1.3 * 1.2)) < 1e-15);
}

TEST_CASE("inverse of 1 - t is the geometric series") {
  auto s = JetSpace::get(1, 5);
  Jet inv = (Jet::constant(s, 1.0) - Jet::variable(s, 0)).inverse();
  for (std::size_t i = 0; i < s->size(); ++i) CHECK(std::abs(inv[i] - 1.0) < 1e-15);
  CHECK_THROWS_AS(Jet::variable(s, 0).inverse(), NumericError);
}

TEST_CASE("product rule holds on random jets") {
  Rng rng(11);
  auto s = JetSpace::get(3, 4);
  auto s3 = JetSpace::get(3, 3);
  for (int trial = 0; trial < 5; ++trial) {
    Jet a = random_jet(s, rng), b = random_jet(s, rng);
    for (int v = 0; v < 3; ++v) {
      Jet lhs = (a * b).derivative(v);
      Jet rhs = a.derivative(v) * b.truncated(3) + a.truncated(3) * b.derivative(v);
      CHECK((lhs - rhs).max_abs() < 1e-12);
      CHECK(lhs.space() == s3);
    }
  }
}

TEST_CASE("d of d vanishes and wedge is antisymmetric") {
  Rng rng(12);
  auto s = JetSpace::get(4, 4);
  Jet f = random_jet(s, rng);
  ExteriorForm df = exterior_d(ExteriorForm::function(f));
  ExteriorForm ddf = exterior_d(df);
  CHECK(ddf.degree() == 2);
  CHECK(ddf.max_abs() == 0.0);

  ExteriorForm a(1, s), b(1, s);
  for (int i = 0; i < 4; ++i) {
    a.component(i) = random_jet(s, rng);
    b.component(i) = random_jet(s, rng);
  }
  CHECK((wedge(a, b) + wedge(b, a)).max_abs() < 1e-13);
  CHECK_THROWS_AS(wedge(wedge(a, b), a), ConstraintError);
  CHECK_THROWS_AS(exterior_d(ddf), ConstraintError);
}

TEST_CASE("Leibniz rule for d(f a)") {
  Rng rng(13);
  auto s = JetSpace::get(3, 3);
  auto s2 = JetSpace::get(3, 2);
  Jet f = random_jet(s, rng);
  ExteriorForm a(1, s);
  for (int i = 0; i < 3; ++i) a.component(i) = random_jet(s, rng);
  ExteriorForm lhs = exterior_d(f * a);
  ExteriorForm rhs = wedge(exterior_d(ExteriorForm::function(f)), a.truncated(2)) + f.truncated(2) * exterior_d(a);
  CHECK((lhs - rhs).max_abs() < 1e-12);
  CHECK(lhs.space() == s2);
}

TEST_CASE("mixed spaces are rejected") {
  auto a = Jet::variable(JetSpace::get(2, 3), 0);
  auto b = Jet::variable(JetSpace::get(3, 3), 0);
  auto c = Jet::variable(JetSpace::get(2, 2), 0);
  CHECK_THROWS_AS(a + b, DimensionError);
  CHECK_THROWS_AS(a * c, JetOrderError);
  CHECK_THROWS_AS(JetSpace::get(2, 8), JetOrderError);
  CHECK_THROWS_AS(a.truncated(4), JetOrderError);
}

TEST_CASE("matrix exponential of a nilpotent jet matches the dense exponential") {
  Rng rng(14);
  auto s = JetSpace::get(2, 6);
  MatrixJet X(s, 3, 3);
  const ComplexMatrix E0 = rng.complex_gaussian(3, 3), E1 = rng.complex_gaussian(3, 3);
  X.coeffs()[s->var_index(0)] = E0;
  X.coeffs()[s->var_index(1)] = E1;
  MatrixJet eX = MatrixJet::exp_nilpotent(X);
  const double t[2] = {1e-2, -2e-2};
  ComplexMatrix M = t[0] * E0 + t[1] * E1;
  // Taylor series of exp(M) to degree 6, independent of the jet code.
  ComplexMatrix ref = ComplexMatrix::Identity(3, 3), term = ref;
  for (int k = 1; k <= 6; ++k) {
    term = term * M / static_cast<double>(k);
    ref += term;
  }
  CHECK(max_abs(eX.evaluate(t) - ref) < 1e-14);

  MatrixJet A = MatrixJet::constant(s, ComplexMatrix::Identity(3, 3) * 2.0) + X;
  MatrixJet P = A * A.inverse();
  CHECK(max_abs(P.coeffs()[0] - ComplexMatrix::Identity(3, 3)) < 1e-14);
  for (std::size_t i = 1; i < P.coeffs().size(); ++i) CHECK(max_abs(P.coeffs()[i]) < 1e-12);
}
