#include "shilov/maurer_cartan.hpp"

#include <algorithm>

#include "shilov/errors.hpp"
#include "shilov/kernels.hpp"

namespace shilov {

BlockRange block_range(const SignatureForm& F, Block b) {
  const int q = F.q(), n = F.n(), x = F.x_begin(), y = F.y_begin();
  switch (b) {
    case Block::psi: return {0, 0, q, q};
    case Block::theta: return {0, x, q, n};
    case Block::phi: return {0, y, q, q};
    case Block::sigma: return {x, 0, n, q};
    case Block::omega: return {x, x, n, n};
    case Block::theta_xy: return {x, y, n, q};
    case Block::xi: return {y, 0, q, q};
    case Block::sigma_yx: return {y, x, q, n};
    case Block::psi_hat: return {y, y, q, q};
  }
  throw DimensionError("block_range: unknown block");
}

std::string to_string(Block b) {
  switch (b) {
    case Block::psi: return "psi";
    case Block::theta: return "theta";
    case Block::phi: return "phi";
    case Block::sigma: return "sigma";
    case Block::omega: return "omega";
    case Block::theta_xy: return "theta_xy";
    case Block::xi: return "xi";
    case Block::sigma_yx: return "sigma_yx";
    case Block::psi_hat: return "psi_hat";
  }
  return "unknown";
}

ExteriorForm ConnectionMatrix::entry(int L, int G) const {
  if (components.empty()) throw DimensionError("ConnectionMatrix::entry: empty connection");
  ExteriorForm f(1, components[0].space());
  for (int i = 0; i < num_vars(); ++i) f.component(i) = components[i].entry(L, G);
  return f;
}

std::vector<ComplexMatrix> ConnectionMatrix::values() const {
  std::vector<ComplexMatrix> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.value());
  return out;
}

std::vector<ComplexMatrix> ConnectionMatrix::block_values(Block b) const {
  const BlockRange r = block_range(F, b);
  std::vector<ComplexMatrix> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.value().block(r.row, r.col, r.rows, r.cols));
  return out;
}

ComplexMatrix ConnectionMatrix::value_on(const Eigen::VectorXd& v) const {
  if (v.size() != num_vars()) throw DimensionError("ConnectionMatrix::value_on: wrong vector length");
  ComplexMatrix out = ComplexMatrix::Zero(F.dim(), F.dim());
  for (int i = 0; i < num_vars(); ++i) out += v(i) * components[i].value();
  return out;
}

ConnectionMatrix connection_from_frame_field(const SignatureForm& F, const MatrixJet& A) {
  if (A.rows() != F.dim() || A.cols() != F.dim()) throw DimensionError("connection: frame field has wrong shape");
  if (A.order() < 1) throw JetOrderError("connection: frame field needs jet order >= 1");
  const MatrixJet Ainv = A.inverse().truncated(A.order() - 1);
  ConnectionMatrix C{F, {}};
  C.components.reserve(A.num_vars());
  for (int i = 0; i < A.num_vars(); ++i) C.components.push_back(A.derivative(i) * Ainv);
  return C;
}

ConnectionMatrix connection_from_frame_field(const ChartField& chart) {
  return connection_from_frame_field(chart.form(), chart.frame_jet());
}

ConnectionMatrix connection_from_frame(const SignatureForm& F, const ComplexMatrix& A, int num_vars, int order) {
  require_shape(A, F.dim(), F.dim(), "connection_from_frame");
  return connection_from_frame_field(F, MatrixJet::constant(JetSpace::get(num_vars, order), A));
}

std::vector<MatrixJet> curvature(const ConnectionMatrix& C) {
  const int m = C.num_vars();
  if (m == 0) return {};
  if (C.order() < 1) throw JetOrderError("curvature: connection needs jet order >= 1 (frame order >= 2)");
  const int lower = C.order() - 1;
  std::vector<MatrixJet> low;
  for (const auto& c : C.components) low.push_back(c.truncated(lower));

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  std::vector<MatrixJet> out(pairs.size(), MatrixJet(JetSpace::get(m, lower), C.F.dim(), C.F.dim()));
  const long np = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < np; ++k) {
    const auto [i, j] = pairs[k];
    MatrixJet r = C.components[j].derivative(i) - C.components[i].derivative(j);
    r -= kernels::matrix_jet_product_serial(low[i], low[j]);
    r += kernels::matrix_jet_product_serial(low[j], low[i]);
    out[k] = std::move(r);
  }
  return out;
}

double symmetry_residual(const ConnectionMatrix& C) {
  double worst = 0.0;
  const ComplexMatrix& S = C.F.S();
  for (const auto& c : C.components)
    for (const auto& k : c.coeffs()) worst = std::max(worst, max_abs(k * S + S * k.adjoint()));
  return worst;
}

double trace_residual(const ConnectionMatrix& C) {
  double worst = 0.0;
  for (const auto& c : C.components)
    for (const auto& k : c.coeffs()) worst = std::max(worst, std::abs(k.trace()));
  return worst;
}

StructureReport check_structure_equations(const ConnectionMatrix& C, double tol) {
  if (C.order() < 1) throw JetOrderError("structure equations need a frame field of jet order >= 2");
  StructureReport rep;
  for (const auto& r : curvature(C)) {
    rep.total = std::max(rep.total, r.max_abs());
    for (std::size_t b = 0; b < StructureReport::kBlocks.size(); ++b) {
      const BlockRange br = block_range(C.F, StructureReport::kBlocks[b]);
      for (const auto& k : r.coeffs())
        rep.blocks[b] = std::max(rep.blocks[b], max_abs(k.block(br.row, br.col, br.rows, br.cols)));
    }
  }
  rep.symmetry = symmetry_residual(C);
  rep.trace = trace_residual(C);
  rep.pass = rep.total <= tol;
  return rep;
}

Decomposition point_basis_decompose(const Eigen::RowVectorXcd& target, const ComplexMatrix& basis, double rank_tol) {
  if (target.size() != basis.cols()) throw DimensionError("point_basis_decompose: functional length mismatch");
  Eigen::JacobiSVD<ComplexMatrix> svd(basis.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Decomposition d;
  const double cut = rank_tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++d.rank;
  if (d.rank < basis.rows()) throw NumericError("point_basis_decompose: basis functionals are rank deficient");
  d.coefficients = svd.solve(target.transpose());
  d.residual = max_abs(basis.transpose() * d.coefficients - target.transpose());
  return d;
}

ComplexMatrix point_basis(const ConnectionMatrix& C) {
  const int q = C.F.q(), n = C.F.n(), m = C.num_vars();
  ComplexMatrix B(q * q + 2 * q * n, m);
  const auto phi = C.block_values(Block::phi);
  const auto theta = C.block_values(Block::theta);
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) B(point_basis_phi(C.F, a, b), i) = phi[i](a, b);
    for (int a = 0; a < q; ++a)
      for (int j = 0; j < n; ++j) {
        B(point_basis_theta(C.F, a, j), i) = theta[i](a, j);
        B(point_basis_theta_bar(C.F, a, j), i) = std::conj(theta[i](a, j));
      }
  }
  return B;
}

double contact_modulo_reduction(const ConnectionMatrix& C) {
  const int q = C.F.q(), m = C.num_vars();
  if (C.order() < 1) throw JetOrderError("contact_modulo_reduction: frame field needs jet order >= 2");
  const auto np = static_cast<Eigen::Index>(ExteriorForm::num_pairs(m));
  if (np == 0) return 0.0;
  const BlockRange phi = block_range(C.F, Block::phi);
  const BlockRange th = block_range(C.F, Block::theta);
  const BlockRange thxy = block_range(C.F, Block::theta_xy);
  const auto vals = C.values();

  // Generators phi_cd ^ dt_k at t = 0, in pair coordinates.
  ComplexMatrix gens = ComplexMatrix::Zero(np, static_cast<Eigen::Index>(q) * q * m);
  Eigen::Index col = 0;
  for (int c = 0; c < q; ++c)
    for (int d = 0; d < q; ++d)
      for (int k = 0; k < m; ++k, ++col)
        for (int i = 0; i < m; ++i) {
          if (i == k) continue;
          const Complex v = vals[i](phi.row + c, phi.col + d);
          if (i < k) gens(ExteriorForm::pair_index(i, k, m), col) += v;
          else gens(ExteriorForm::pair_index(k, i, m), col) -= v;
        }
  Eigen::JacobiSVD<ComplexMatrix> svd(gens, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);

  double worst = 0.0;
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      Eigen::VectorXcd T(np);
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
          Complex dphi = C.components[j].coeffs()[C.components[j].space()->var_index(i)](phi.row + a, phi.col + b) -
                         C.components[i].coeffs()[C.components[i].space()->var_index(j)](phi.row + a, phi.col + b);
          Complex tt = 0.0;
          for (int l = 0; l < C.F.n(); ++l)
            tt += vals[i](th.row + a, th.col + l) * vals[j](thxy.row + l, thxy.col + b) -
                  vals[j](th.row + a, th.col + l) * vals[i](thxy.row + l, thxy.col + b);
          T(ExteriorForm::pair_index(i, j, m)) = dphi - tt;
        }
      const Eigen::VectorXcd rem = T - gens * svd.solve(T);
      worst = std::max(worst, rem.cwiseAbs().maxCoeff());
    }
  return worst;
}

}  // namespace shilov
