#pragma once

#include <string>

#include "shilov/hermitian.hpp"

namespace shilov {

/// Pointwise form system: row i of thetas / phis is the 1-form theta_i / phi_i
/// evaluated on the D real coordinate directions.
struct FormSystem {
  ComplexMatrix thetas;  // r x D
  ComplexMatrix phis;    // r x D
};

/// max |sum_i theta_i (x) phi_i - phi_i (x) theta_i|.
double wedge_sum_residual(const FormSystem& sys);

struct CartanResult {
  bool ok = false;
  ComplexMatrix coefficients;    // c(j, k): phi_j = sum_k c(j, k) theta_k
  Eigen::VectorXd residuals;     // per phi_j
  double max_residual = 0.0;
  double symmetry_defect = 0.0;  // ||c - c^T||_max, reported only
  double wedge_residual = 0.0;
  std::string diagnostic;
};

/// tol is relative: the wedge precondition uses tol * s_max(theta) * max(s_max(theta), s_max(phi)),
/// the span test tol * s_max(theta). A violated precondition gives ok = false with no coefficients.
/// Throws ConstraintError if the thetas are not linearly independent.
CartanResult cartan_decompose(const FormSystem& sys, double tol = 1e-9);

}  // namespace shilov
