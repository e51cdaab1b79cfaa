#pragma once

#include <array>
#include <string>
#include <vector>

#include "shilov/geometry.hpp"
#include "shilov/hermitian.hpp"
#include "shilov/jet.hpp"

namespace shilov {

/// The nine named blocks of the connection matrix in (Z, X, Y) order.
enum class Block { psi, theta, phi, sigma, omega, theta_xy, xi, sigma_yx, psi_hat };

struct BlockRange {
  int row, col, rows, cols;
};
BlockRange block_range(const SignatureForm& F, Block b);
std::string to_string(Block b);

/// pi = dA A^{-1} for a frame field A(t), stored as one matrix jet per
/// coordinate: pi = sum_i pi_i dt_i. Components have order one less than A.
struct ConnectionMatrix {
  SignatureForm F;
  std::vector<MatrixJet> components;

  int num_vars() const { return static_cast<int>(components.size()); }
  int order() const { return components.empty() ? 0 : components[0].order(); }

  /// Scalar 1-form pi[L][G].
  ExteriorForm entry(int L, int G) const;
  /// pi_i(0) for each direction i.
  std::vector<ComplexMatrix> values() const;
  /// Values of one block at t = 0, one matrix per direction.
  std::vector<ComplexMatrix> block_values(Block b) const;
  /// Value of pi on the real tangent vector v at t = 0.
  ComplexMatrix value_on(const Eigen::VectorXd& v) const;
};

ConnectionMatrix connection_from_frame_field(const SignatureForm& F, const MatrixJet& A);
ConnectionMatrix connection_from_frame_field(const ChartField& chart);
/// A constant frame has zero connection; m variables at the given order.
ConnectionMatrix connection_from_frame(const SignatureForm& F, const ComplexMatrix& A, int num_vars, int order);

/// Per-block residual of d pi - pi ^ pi. The six tracked blocks are phi, theta,
/// psi, omega, sigma (X rows, Z columns) and xi, in that order.
struct StructureReport {
  double total = 0.0;
  std::array<double, 6> blocks{};
  double symmetry = 0.0;  // ||pi S + S pi^*|| over all jet coefficients
  double trace = 0.0;     // ||sum_L pi[L][L]|| over all jet coefficients
  bool pass = false;
  static constexpr std::array<Block, 6> kBlocks{Block::phi, Block::theta, Block::psi,
                                                Block::omega, Block::sigma, Block::xi};
};

/// pass iff total <= tol. Symmetry and trace are reported alongside.
StructureReport check_structure_equations(const ConnectionMatrix& C, double tol = 1e-9);

/// The 2-form d pi - pi ^ pi entrywise, as matrix jets indexed by pair (i < j).
std::vector<MatrixJet> curvature(const ConnectionMatrix& C);

double symmetry_residual(const ConnectionMatrix& C);
double trace_residual(const ConnectionMatrix& C);

/// Least-squares decomposition of a functional against a family of functionals.
/// Functionals are complex row vectors over the real tangent directions.
struct Decomposition {
  Eigen::VectorXcd coefficients;
  double residual = 0.0;
  int rank = 0;
};
/// Rows of basis are the basis functionals. Throws NumericError if the rows are
/// not complex-linearly independent.
Decomposition point_basis_decompose(const Eigen::RowVectorXcd& target, const ComplexMatrix& basis, double rank_tol = 1e-9);

/// Basis {phi_a^b (row-major), theta_a^j (row-major), conj theta_a^j} evaluated at t = 0.
ComplexMatrix point_basis(const ConnectionMatrix& C);
inline int point_basis_phi(const SignatureForm& F, int a, int b) { return a * F.q() + b; }
inline int point_basis_theta(const SignatureForm& F, int a, int j) { return F.q() * F.q() + a * F.n() + j; }
inline int point_basis_theta_bar(const SignatureForm& F, int a, int j) {
  return F.q() * F.q() + F.q() * F.n() + a * F.n() + j;
}

/// max over (a, b) of the part of (d phi - theta ^ theta_xy)_a^b at t = 0 that is
/// not in the span of phi_c^d ^ (anything).
double contact_modulo_reduction(const ConnectionMatrix& C);

}  // namespace shilov
