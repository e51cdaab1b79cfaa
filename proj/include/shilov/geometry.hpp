#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shilov/hermitian.hpp"
#include "shilov/jet.hpp"

namespace shilov {

inline constexpr int kDefaultJetOrder = 3;

// --- membership -------------------------------------------------------------

/// I_q - z^* z positive definite (smallest eigenvalue > margin).
bool in_domain(const SignatureForm& F, const ComplexMatrix& z, double margin = 0.0);
/// Smallest eigenvalue of I_q - z^* z >= -tol.
bool in_closed_domain(const SignatureForm& F, const ComplexMatrix& z, double tol = 1e-12);
bool on_boundary(const SignatureForm& F, const ComplexMatrix& z, double tol = kExactTol);
/// ||I_q - z^* z||_max.
double boundary_residual(const ComplexMatrix& z);

/// Deterministic per seed; QR of Gaussian p x q matrices.
std::vector<ComplexMatrix> sample_boundary(const SignatureForm& F, std::uint64_t seed, std::size_t count);

/// Columns of the standard lift (I_q over z), (p+q) x q.
ComplexMatrix lift(const ComplexMatrix& z);
/// The point whose lift spans the same q-plane as the rows of R (q x (p+q)).
/// Throws NumericError when the top block is singular.
ComplexMatrix point_from_rows(const SignatureForm& F, const ComplexMatrix& R);
ComplexMatrix point_of_frame(const SignatureForm& F, const ComplexMatrix& A);

// --- Lie algebra of the frame group -------------------------------------------

/// Real basis of the anti-Hermitian k x k matrices: i E_aa, then for a < b
/// E_ab - E_ba and i (E_ab + E_ba).
std::vector<ComplexMatrix> antihermitian_basis(int k);

/// True iff E S + S E^* = 0 and trace E = 0 within tol.
bool in_frame_algebra(const SignatureForm& F, const ComplexMatrix& E, double tol = kExactTol);

/// The d = 2nq + q^2 chart directions E(theta, phi) = [[0, theta, phi], [0, 0, -theta^*], [0, 0, 0]].
/// theta entries come first as (re, im) pairs in row-major (alpha, j) order,
/// then phi over antihermitian_basis(q).
std::vector<ComplexMatrix> transversal_basis(const SignatureForm& F);
inline int transversal_dim(const SignatureForm& F) { return 2 * F.n() * F.q() + F.q() * F.q(); }
inline int theta_direction(const SignatureForm& F, int alpha, int j, bool imaginary) {
  return 2 * (alpha * F.n() + j) + (imaginary ? 1 : 0);
}

/// Real basis of the stabilizer of the Z-span in frame coordinates: block
/// lower-triangular elements of the frame algebra.
std::vector<ComplexMatrix> stabilizer_basis(const SignatureForm& F);

// --- charts --------------------------------------------------------------------

/// Frame field A(t) = exp(G(t)) exp(sum_i t_i E_i) A_0 through a boundary point.
///
/// G(t) = sum_i t_i K_i + sum_{i<=j} t_i t_j K_ij is an optional stabilizer-valued
/// gauge. It leaves the point map t -> span Z(t) untouched but makes the frame
/// section generic, so the connection has nonzero higher-order terms.
class ChartField {
 public:
  ChartField(SignatureForm F, ComplexMatrix z0, ComplexMatrix base_frame, std::vector<ComplexMatrix> directions,
             int order);

  const SignatureForm& form() const { return F_; }
  const ComplexMatrix& basepoint() const { return z0_; }
  const ComplexMatrix& base_frame() const { return A0_; }
  const std::vector<ComplexMatrix>& directions() const { return directions_; }
  int num_vars() const { return static_cast<int>(directions_.size()); }
  int order() const { return order_; }

  /// Gauge terms; quadratic has m(m+1)/2 entries in (i <= j) row-major order, or is empty.
  void set_gauge(std::vector<ComplexMatrix> linear, std::vector<ComplexMatrix> quadratic);
  bool has_gauge() const { return !gauge_linear_.empty() || !gauge_quadratic_.empty(); }

  MatrixJet frame_jet() const;
  /// Same field evaluated with dense matrix exponentials, independent of the jet engine.
  ComplexMatrix frame_at(std::span<const double> t) const;
  ComplexMatrix point_at(std::span<const double> t) const;

 private:
  ComplexMatrix gauge_at(std::span<const double> t) const;

  SignatureForm F_;
  ComplexMatrix z0_;
  ComplexMatrix A0_;
  std::vector<ComplexMatrix> directions_;
  std::vector<ComplexMatrix> gauge_linear_;
  std::vector<ComplexMatrix> gauge_quadratic_;
  int order_;
};

struct ChartOptions {
  /// Subset of transversal_basis indices; empty selects all d directions.
  std::vector<int> directions;
  /// Nonzero seeds a random stabilizer gauge of the given scale.
  std::uint64_t gauge_seed = 0;
  double gauge_scale = 0.5;
};

ChartField chart_through(const SignatureForm& F, const ComplexMatrix& z0, int order,
                         const ChartOptions& options = {});
/// Chart from explicit Lie algebra directions; throws ConstraintError if one is not in the algebra.
ChartField chart_from_directions(const SignatureForm& F, const ComplexMatrix& z0,
                                 std::vector<ComplexMatrix> directions, int order);

/// Random gauge from the stabilizer algebra for an m-variable chart.
void randomize_gauge(ChartField& chart, std::uint64_t seed, double scale);

/// Split of the chart's parameter directions at the basepoint.
struct CRTangentData {
  /// Columns are real parameter vectors; cr spans ker(phi), contact a complement.
  Eigen::MatrixXd cr_basis;
  Eigen::MatrixXd contact_basis;
  /// Complex structure on the CR subspace in cr_basis coordinates, defined by theta(Jv) = i theta(v).
  Eigen::MatrixXd complex_structure;
  /// theta-block values on the cr_basis columns, (q*n) x (2nq).
  ComplexMatrix theta_values;
};

/// phi and theta are the connection blocks of the chart's own frame field at t = 0.
CRTangentData cr_tangent_basis(const ChartField& chart);

/// Numerical rank of the Jacobian of t -> z(t) at t = 0 (central differences on point_at).
int point_map_rank(const ChartField& chart, double step = 1e-6, double tol = 1e-6);

}  // namespace shilov
