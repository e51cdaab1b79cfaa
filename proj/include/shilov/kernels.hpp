#pragma once

// Hot loops in two flavours: a plain serial reference and an OpenMP version.
// The serial versions are kept for testing; both must agree (bit-for-bit for
// the jet product, to rounding elsewhere).

#include <vector>

#include "shilov/jet.hpp"

namespace shilov {

class CRMap;

namespace kernels {

/// Truncated product of matrix jets. The parallel version splits by output
/// monomial and sums in the same order as the serial one.
MatrixJet matrix_jet_product_serial(const MatrixJet& a, const MatrixJet& b);
MatrixJet matrix_jet_product_parallel(const MatrixJet& a, const MatrixJet& b);
/// Dispatches to the parallel version.
MatrixJet matrix_jet_product(const MatrixJet& a, const MatrixJet& b);

/// ||I - f(z)^* f(z)||_max for every sample.
std::vector<double> boundary_residuals_serial(const CRMap& f, const std::vector<ComplexMatrix>& samples);
std::vector<double> boundary_residuals_parallel(const CRMap& f, const std::vector<ComplexMatrix>& samples);

/// max |d pi - pi ^ pi| over entries, pairs and jet coefficients, for a
/// connection given by its m components pi_i (each an N x N matrix jet).
/// The serial version goes through scalar ExteriorForm wedges entry by entry;
/// the parallel one uses matrix products per (i, j) pair.
double structure_residual_serial(const std::vector<MatrixJet>& pi);
double structure_residual_parallel(const std::vector<MatrixJet>& pi);

}  // namespace kernels
}  // namespace shilov
