#include "shilov/cartan_lemma.hpp"

#include <algorithm>
#include <sstream>

#include "shilov/errors.hpp"

namespace shilov {

namespace {

double largest_singular_value(const ComplexMatrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<ComplexMatrix>(M).singularValues()(0);
}

}  // namespace

double wedge_sum_residual(const FormSystem& sys) {
  if (sys.thetas.rows() != sys.phis.rows() || sys.thetas.cols() != sys.phis.cols())
    throw DimensionError("wedge_sum_residual: theta and phi systems differ in shape");
  const ComplexMatrix T = sys.thetas.transpose() * sys.phis - sys.phis.transpose() * sys.thetas;
  return max_abs(T);
}

CartanResult cartan_decompose(const FormSystem& sys, double tol) {
  CartanResult out;
  out.wedge_residual = wedge_sum_residual(sys);
  const auto r = sys.thetas.rows();

  Eigen::JacobiSVD<ComplexMatrix> svd(sys.thetas.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  if (r > sys.thetas.cols() || smax == 0.0 || sv(sv.size() - 1) <= 1e-12 * smax)
    throw ConstraintError("cartan_decompose: thetas are not linearly independent");

  const double wedge_tol = tol * smax * std::max(smax, largest_singular_value(sys.phis));
  if (out.wedge_residual > wedge_tol) {
    std::ostringstream msg;
    msg << "wedge sum does not vanish: residual " << out.wedge_residual << " > " << wedge_tol;
    out.diagnostic = msg.str();
    return out;
  }

  // phi^T = theta^T c^T
  out.coefficients = svd.solve(sys.phis.transpose()).transpose();
  const ComplexMatrix resid = out.coefficients * sys.thetas - sys.phis;
  out.residuals.resize(r);
  for (Eigen::Index j = 0; j < r; ++j) out.residuals(j) = resid.row(j).cwiseAbs().maxCoeff();
  out.max_residual = r ? out.residuals.maxCoeff() : 0.0;
  out.symmetry_defect = max_abs(out.coefficients - out.coefficients.transpose());
  out.ok = out.max_residual <= tol * smax;
  if (!out.ok) out.diagnostic = "a phi is not in the span of the thetas";
  return out;
}

}  // namespace shilov
