#include "shilov/geometry.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "shilov/errors.hpp"
#include "shilov/frames.hpp"
#include "shilov/random.hpp"

namespace shilov {

namespace {

double min_eigenvalue_gap(const SignatureForm& F, const ComplexMatrix& z) {
  require_shape(z, F.p(), F.q(), "domain test");
  const ComplexMatrix M = ComplexMatrix::Identity(F.q(), F.q()) - z.adjoint() * z;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

ComplexMatrix frame_block(const SignatureForm& F, const ComplexMatrix& zz, const ComplexMatrix& zx,
                          const ComplexMatrix& zy, const ComplexMatrix& xz, const ComplexMatrix& xx,
                          const ComplexMatrix& xy, const ComplexMatrix& yz, const ComplexMatrix& yx,
                          const ComplexMatrix& yy) {
  const int q = F.q(), n = F.n();
  ComplexMatrix E = ComplexMatrix::Zero(F.dim(), F.dim());
  if (zz.size()) E.block(0, 0, q, q) = zz;
  if (zx.size()) E.block(0, q, q, n) = zx;
  if (zy.size()) E.block(0, q + n, q, q) = zy;
  if (xz.size()) E.block(q, 0, n, q) = xz;
  if (xx.size()) E.block(q, q, n, n) = xx;
  if (xy.size()) E.block(q, q + n, n, q) = xy;
  if (yz.size()) E.block(q + n, 0, q, q) = yz;
  if (yx.size()) E.block(q + n, q, q, n) = yx;
  if (yy.size()) E.block(q + n, q + n, q, q) = yy;
  return E;
}

const ComplexMatrix kNone;

}  // namespace

bool in_domain(const SignatureForm& F, const ComplexMatrix& z, double margin) {
  return min_eigenvalue_gap(F, z) > margin;
}

bool in_closed_domain(const SignatureForm& F, const ComplexMatrix& z, double tol) {
  return min_eigenvalue_gap(F, z) >= -tol;
}

double boundary_residual(const ComplexMatrix& z) {
  return max_abs(ComplexMatrix::Identity(z.cols(), z.cols()) - z.adjoint() * z);
}

bool on_boundary(const SignatureForm& F, const ComplexMatrix& z, double tol) {
  require_shape(z, F.p(), F.q(), "on_boundary");
  return boundary_residual(z) <= tol;
}

std::vector<ComplexMatrix> sample_boundary(const SignatureForm& F, std::uint64_t seed, std::size_t count) {
  Rng rng(seed);
  std::vector<ComplexMatrix> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const ComplexMatrix g = rng.complex_gaussian(F.p(), F.q());
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    out.push_back(qr.householderQ() * ComplexMatrix::Identity(F.p(), F.q()));
  }
  return out;
}

ComplexMatrix lift(const ComplexMatrix& z) {
  const auto p = z.rows(), q = z.cols();
  ComplexMatrix L(p + q, q);
  L.topRows(q).setIdentity();
  L.bottomRows(p) = z;
  return L;
}

ComplexMatrix point_from_rows(const SignatureForm& F, const ComplexMatrix& R) {
  require_shape(R, F.q(), F.dim(), "point_from_rows");
  const ComplexMatrix C = R.transpose();
  Eigen::FullPivLU<ComplexMatrix> lu(C.topRows(F.q()));
  if (lu.rank() < F.q()) throw NumericError("point_from_rows: plane is not a graph over the first q coordinates");
  return C.bottomRows(F.p()) * lu.inverse();
}

ComplexMatrix point_of_frame(const SignatureForm& F, const ComplexMatrix& A) {
  require_shape(A, F.dim(), F.dim(), "point_of_frame");
  return point_from_rows(F, A.topRows(F.q()));
}

std::vector<ComplexMatrix> antihermitian_basis(int k) {
  const Complex I(0.0, 1.0);
  std::vector<ComplexMatrix> out;
  for (int a = 0; a < k; ++a) {
    ComplexMatrix M = ComplexMatrix::Zero(k, k);
    M(a, a) = I;
    out.push_back(M);
  }
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      ComplexMatrix M = ComplexMatrix::Zero(k, k);
      M(a, b) = 1.0;
      M(b, a) = -1.0;
      out.push_back(M);
      M(a, b) = I;
      M(b, a) = I;
      out.push_back(M);
    }
  return out;
}

bool in_frame_algebra(const SignatureForm& F, const ComplexMatrix& E, double tol) {
  require_shape(E, F.dim(), F.dim(), "in_frame_algebra");
  if (max_abs(E * F.S() + F.S() * E.adjoint()) > tol) return false;
  return std::abs(E.trace()) <= tol;
}

std::vector<ComplexMatrix> transversal_basis(const SignatureForm& F) {
  const int q = F.q(), n = F.n();
  std::vector<ComplexMatrix> out;
  for (int a = 0; a < q; ++a)
    for (int j = 0; j < n; ++j)
      for (Complex unit : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
        ComplexMatrix theta = ComplexMatrix::Zero(q, n);
        theta(a, j) = unit;
        out.push_back(frame_block(F, kNone, theta, kNone, kNone, kNone, -theta.adjoint(), kNone, kNone, kNone));
      }
  for (const auto& phi : antihermitian_basis(q))
    out.push_back(frame_block(F, kNone, kNone, phi, kNone, kNone, kNone, kNone, kNone, kNone));
  return out;
}

std::vector<ComplexMatrix> stabilizer_basis(const SignatureForm& F) {
  const int q = F.q(), n = F.n();
  const Complex I(0.0, 1.0);
  std::vector<ComplexMatrix> out;
  // psi with psi_hat = -psi^*; the imaginary diagonal carries trace 2i, removed through omega.
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (Complex unit : {Complex(1.0, 0.0), I}) {
        ComplexMatrix psi = ComplexMatrix::Zero(q, q);
        psi(a, b) = unit;
        ComplexMatrix omega = ComplexMatrix::Zero(n, n);
        if (a == b && unit == I) omega = ComplexMatrix::Identity(n, n) * (-2.0 * I / static_cast<double>(n));
        out.push_back(frame_block(F, psi, kNone, kNone, kNone, omega, kNone, kNone, kNone, -psi.adjoint()));
      }
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < q; ++a)
      for (Complex unit : {Complex(1.0, 0.0), I}) {
        ComplexMatrix sigma = ComplexMatrix::Zero(n, q);
        sigma(j, a) = unit;
        out.push_back(frame_block(F, kNone, kNone, kNone, sigma, kNone, kNone, kNone, -sigma.adjoint(), kNone));
      }
  for (const auto& omega : antihermitian_basis(n)) {
    // Trace-free diagonal: pair each i E_jj with -i E_{j+1,j+1}; the last one is dropped.
    ComplexMatrix w = omega;
    int diag = -1;
    for (int j = 0; j < n; ++j)
      if (w(j, j) != Complex(0.0)) diag = j;
    if (diag >= 0) {
      if (diag == n - 1) continue;
      w(diag + 1, diag + 1) = -I;
    }
    out.push_back(frame_block(F, kNone, kNone, kNone, kNone, w, kNone, kNone, kNone, kNone));
  }
  for (const auto& xi : antihermitian_basis(q))
    out.push_back(frame_block(F, kNone, kNone, kNone, kNone, kNone, kNone, xi, kNone, kNone));
  return out;
}

// ---------------------------------------------------------------------------

ChartField::ChartField(SignatureForm F, ComplexMatrix z0, ComplexMatrix base_frame,
                       std::vector<ComplexMatrix> directions, int order)
    : F_(std::move(F)),
      z0_(std::move(z0)),
      A0_(std::move(base_frame)),
      directions_(std::move(directions)),
      order_(order) {
  if (directions_.empty()) throw DimensionError("ChartField: at least one direction required");
  if (order_ < 0 || order_ > JetSpace::kMaxOrder) throw JetOrderError("ChartField: unsupported jet order");
  require_shape(A0_, F_.dim(), F_.dim(), "ChartField base frame");
  for (const auto& E : directions_) require_shape(E, F_.dim(), F_.dim(), "ChartField direction");
}

void ChartField::set_gauge(std::vector<ComplexMatrix> linear, std::vector<ComplexMatrix> quadratic) {
  const std::size_t m = directions_.size();
  if (!linear.empty() && linear.size() != m) throw DimensionError("ChartField gauge: need one linear term per variable");
  if (!quadratic.empty() && quadratic.size() != m * (m + 1) / 2)
    throw DimensionError("ChartField gauge: need m(m+1)/2 quadratic terms");
  gauge_linear_ = std::move(linear);
  gauge_quadratic_ = std::move(quadratic);
}

MatrixJet ChartField::frame_jet() const {
  const int m = num_vars();
  const int N = F_.dim();
  auto space = JetSpace::get(m, order_);
  if (order_ == 0) return MatrixJet::constant(space, A0_);
  MatrixJet X(space, N, N);
  for (int i = 0; i < m; ++i) X.coeffs()[space->var_index(i)] = directions_[i];
  MatrixJet A = MatrixJet::exp_nilpotent(X) * A0_;
  if (!has_gauge()) return A;

  MatrixJet G(space, N, N);
  for (std::size_t i = 0; i < gauge_linear_.size(); ++i) G.coeffs()[space->var_index(static_cast<int>(i))] = gauge_linear_[i];
  if (order_ >= 2 && !gauge_quadratic_.empty()) {
    std::size_t k = 0;
    std::vector<int> e(m, 0);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j, ++k) {
        ++e[i];
        ++e[j];
        G.coeffs()[space->index_of(e)] += gauge_quadratic_[k];
        --e[i];
        --e[j];
      }
  }
  return MatrixJet::exp_nilpotent(G) * A;
}

ComplexMatrix ChartField::gauge_at(std::span<const double> t) const {
  const int m = num_vars();
  ComplexMatrix G = ComplexMatrix::Zero(F_.dim(), F_.dim());
  for (std::size_t i = 0; i < gauge_linear_.size(); ++i) G += t[i] * gauge_linear_[i];
  if (!gauge_quadratic_.empty()) {
    std::size_t k = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j, ++k) G += (t[i] * t[j]) * gauge_quadratic_[k];
  }
  return G;
}

ComplexMatrix ChartField::frame_at(std::span<const double> t) const {
  if (static_cast<int>(t.size()) != num_vars()) throw DimensionError("ChartField::frame_at: wrong parameter count");
  ComplexMatrix X = ComplexMatrix::Zero(F_.dim(), F_.dim());
  for (int i = 0; i < num_vars(); ++i) X += t[i] * directions_[i];
  ComplexMatrix A = X.exp() * A0_;
  if (has_gauge()) A = gauge_at(t).exp() * A;
  return A;
}

ComplexMatrix ChartField::point_at(std::span<const double> t) const { return point_of_frame(F_, frame_at(t)); }

ChartField chart_through(const SignatureForm& F, const ComplexMatrix& z0, int order, const ChartOptions& options) {
  auto all = transversal_basis(F);
  std::vector<ComplexMatrix> dirs;
  if (options.directions.empty()) {
    dirs = std::move(all);
  } else {
    for (int idx : options.directions) {
      if (idx < 0 || idx >= static_cast<int>(all.size()))
        throw DimensionError("chart_through: direction index out of range");
      dirs.push_back(all[idx]);
    }
  }
  const AdaptedFrame base = build_adapted_frame(F, z0);
  ChartField chart(F, z0, base.A, std::move(dirs), order);
  if (options.gauge_seed != 0) randomize_gauge(chart, options.gauge_seed, options.gauge_scale);
  return chart;
}

ChartField chart_from_directions(const SignatureForm& F, const ComplexMatrix& z0, std::vector<ComplexMatrix> directions,
                                 int order) {
  for (std::size_t i = 0; i < directions.size(); ++i) {
    require_shape(directions[i], F.dim(), F.dim(), "chart direction");
    if (!in_frame_algebra(F, directions[i]))
      throw ConstraintError("chart direction " + std::to_string(i) + " is not in the frame Lie algebra");
  }
  const AdaptedFrame base = build_adapted_frame(F, z0);
  return ChartField(F, z0, base.A, std::move(directions), order);
}

void randomize_gauge(ChartField& chart, std::uint64_t seed, double scale) {
  const auto basis = stabilizer_basis(chart.form());
  Rng rng(seed);
  const double s = scale / std::sqrt(static_cast<double>(basis.size()));
  auto random_element = [&]() {
    ComplexMatrix K = ComplexMatrix::Zero(chart.form().dim(), chart.form().dim());
    for (const auto& b : basis) K += (s * rng.normal()) * b;
    return K;
  };
  const std::size_t m = chart.num_vars();
  std::vector<ComplexMatrix> linear, quadratic;
  for (std::size_t i = 0; i < m; ++i) linear.push_back(random_element());
  for (std::size_t k = 0; k < m * (m + 1) / 2; ++k) quadratic.push_back(random_element());
  chart.set_gauge(std::move(linear), std::move(quadratic));
}

CRTangentData cr_tangent_basis(const ChartField& chart) {
  const SignatureForm& F = chart.form();
  const int q = F.q(), n = F.n(), m = chart.num_vars();
  if (chart.order() < 1) throw JetOrderError("cr_tangent_basis: chart order must be >= 1");
  const MatrixJet A = chart.frame_jet();
  const ComplexMatrix A0inv = A.value().inverse();

  Eigen::MatrixXd phi_real(2 * q * q, m);
  ComplexMatrix theta_all(q * n, m);
  for (int i = 0; i < m; ++i) {
    const ComplexMatrix pi = A.coeffs()[A.space()->var_index(i)] * A0inv;
    const ComplexMatrix phi = pi.block(0, q + n, q, q);
    const ComplexMatrix theta = pi.block(0, q, q, n);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) {
        phi_real(a * q + b, i) = phi(a, b).real();
        phi_real(q * q + a * q + b, i) = phi(a, b).imag();
      }
    for (int a = 0; a < q; ++a)
      for (int j = 0; j < n; ++j) theta_all(a * n + j, i) = theta(a, j);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi_real, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-9 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  if (rank != q * q || m - rank != 2 * n * q)
    throw NumericError("cr_tangent_basis: degenerate chart (directions do not span the transversal)");

  CRTangentData out;
  out.contact_basis = svd.matrixV().leftCols(rank);
  out.cr_basis = svd.matrixV().rightCols(m - rank);
  out.theta_values = theta_all * out.cr_basis.cast<Complex>();

  const int c = 2 * n * q;
  Eigen::MatrixXd R(c, c), iR(c, c);
  R << out.theta_values.real(), out.theta_values.imag();
  iR << -out.theta_values.imag(), out.theta_values.real();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
  if (lu.rank() < c) throw NumericError("cr_tangent_basis: theta is degenerate on the CR subspace");
  out.complex_structure = lu.solve(iR);
  return out;
}

int point_map_rank(const ChartField& chart, double step, double tol) {
  const int m = chart.num_vars();
  const SignatureForm& F = chart.form();
  Eigen::MatrixXd Jac(2 * F.p() * F.q(), m);
  std::vector<double> t(m, 0.0);
  for (int i = 0; i < m; ++i) {
    t[i] = step;
    const ComplexMatrix zp = chart.point_at(t);
    t[i] = -step;
    const ComplexMatrix zm = chart.point_at(t);
    t[i] = 0.0;
    const ComplexMatrix dz = (zp - zm) / (2.0 * step);
    for (int r = 0; r < F.p(); ++r)
      for (int c = 0; c < F.q(); ++c) {
        Jac(2 * (r * F.q() + c), i) = dz(r, c).real();
        Jac(2 * (r * F.q() + c) + 1, i) = dz(r, c).imag();
      }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Jac);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * std::max(1.0, sv(0))) ++rank;
  return rank;
}

}  // namespace shilov
