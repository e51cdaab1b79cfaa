#include <doctest.h>

#include "shilov/kernels.hpp"
#include "shilov/random.hpp"

using namespace shilov;

TEST_CASE("parallel jet product is bit identical to the serial one") {
  Rng rng(41);
  for (auto [m, k] : {std::pair{3, 3}, {8, 3}, {12, 2}}) {
    auto s = JetSpace::get(m, k);
    MatrixJet a(s, 5, 5), b(s, 5, 5);
    for (auto& c : a.coeffs()) c = rng.complex_gaussian(5, 5);
    for (auto& c : b.coeffs()) c = rng.complex_gaussian(5, 5);
    const MatrixJet ps = kernels::matrix_jet_product_serial(a, b);
    const MatrixJet pp = kernels::matrix_jet_product_parallel(a, b);
    for (std::size_t i = 0; i < ps.coeffs().size(); ++i) CHECK(ps.coeffs()[i] == pp.coeffs()[i]);
  }
}
