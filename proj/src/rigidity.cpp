#include "shilov/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shilov/errors.hpp"
#include "shilov/random.hpp"

namespace shilov {

namespace {

Eigen::RowVectorXcd functional(const ConnectionMatrix& C, int L, int G) {
  Eigen::RowVectorXcd v(C.num_vars());
  for (int i = 0; i < C.num_vars(); ++i) v(i) = C.components[i].value()(L, G);
  return v;
}

void recompute(PullbackData& d) {
  d.source_connection = connection_from_frame_field(d.source, d.source_frame);
  d.target_connection = connection_from_frame_field(d.target, d.target_frame);
  d.basis = point_basis(d.source_connection);
  const int q = d.source.q(), qt = d.target.q();
  const ComplexMatrix phis = d.basis.topRows(q * q);
  const int y = d.target.y_begin();
  d.phi_span_residual = 0.0;
  for (int a = 0; a < qt; ++a)
    for (int b = 0; b < qt; ++b) {
      const Decomposition dec = point_basis_decompose(functional(d.target_connection, a, y + b), phis);
      d.phi_span_residual = std::max(d.phi_span_residual, dec.residual);
    }
}

// Source coordinate -> target coordinate for the standard embedding.
int iota(const SignatureForm& F, const SignatureForm& T, int c) { return c < F.q() ? c : T.q() + (c - F.q()); }

// Source frame index -> target frame index.
int kappa(const SignatureForm& F, const SignatureForm& T, int L) {
  if (L < F.q()) return L;
  if (L < F.y_begin()) return T.x_begin() + (L - F.x_begin());
  return T.y_begin() + (L - F.y_begin());
}

ComplexMatrix unitary_part(const ComplexMatrix& M) {
  Eigen::JacobiSVD<ComplexMatrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// Orthonormal basis of the null space of M (columns), singular values <= tol.
ComplexMatrix null_space(const ComplexMatrix& M, double tol) {
  Eigen::JacobiSVD<ComplexMatrix> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  return svd.matrixV().rightCols(M.cols() - rank);
}

template <class E>
[[noreturn]] void rethrow_with_stage(const char* stage, const E& e) {
  throw E(std::string(stage) + ": " + e.what());
}

template <class Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    rethrow_with_stage(stage, e);
  } catch (const ConstraintError& e) {
    rethrow_with_stage(stage, e);
  } catch (const DimensionError& e) {
    rethrow_with_stage(stage, e);
  } catch (const JetOrderError& e) {
    rethrow_with_stage(stage, e);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// pullback

MatrixJet graph_project(const SignatureForm& T, const MatrixJet& Lt, const MatrixJet& R) {
  const int q = T.q(), n = T.n();
  if (Lt.rows() != q || Lt.cols() != T.dim()) throw DimensionError("graph_project: plane rows have the wrong shape");
  const MatrixJet C = Lt * R.inverse();
  const MatrixJet CZ = C.block(0, 0, q, q);
  if (Eigen::FullPivLU<ComplexMatrix>(CZ.value()).rank() < q)
    throw NumericError("graph_project: image plane is transverse to the frame's Z rows");
  const MatrixJet M = CZ.inverse() * C;
  const MatrixJet a = M.block(0, T.x_begin(), q, n);
  const MatrixJet b = M.block(0, T.y_begin(), q, q);
  MatrixJet U = MatrixJet::constant(R.space(), ComplexMatrix::Identity(T.dim(), T.dim()));
  U.set_block(0, T.x_begin(), a);
  U.set_block(0, T.y_begin(), b);
  U.set_block(T.x_begin(), T.y_begin(), -1.0 * a.adjoint());
  return U * R;
}

PullbackData pullback_forms(const CRMap& f, const ChartField& chart, std::uint64_t target_gauge_seed,
                            double gauge_scale) {
  if (!(chart.form() == f.source())) throw DimensionError("pullback_forms: chart and map sources differ");
  if (chart.order() < 1) throw JetOrderError("pullback_forms: need jet order >= 1");
  const SignatureForm& F = f.source();
  const SignatureForm& T = f.target();
  const MatrixJet A = chart.frame_jet();
  const MatrixJet z = point_jet_of_frame(F, A);
  const MatrixJet w = f.evaluate_jet(z);
  const ComplexMatrix w0 = w.value();

  ComplexMatrix A0t;
  try {
    A0t = build_adapted_frame(T, w0, 1e-9).A;
  } catch (const ConstraintError& e) {
    throw NumericError(std::string("pullback_forms: image point is degenerate for the target frame: ") + e.what());
  }
  ChartField section(T, w0, A0t, std::vector<ComplexMatrix>(chart.num_vars(), ComplexMatrix::Zero(T.dim(), T.dim())),
                     chart.order());
  if (target_gauge_seed != 0) randomize_gauge(section, target_gauge_seed, gauge_scale);
  const MatrixJet R = section.frame_jet();

  PullbackData d{F, T, chart.basepoint(), w0, A, graph_project(T, lift_jet(w).transpose(), R), {F, {}}, {T, {}}, {}, 0.0};
  recompute(d);
  return d;
}

PullbackData pullback_forms(const CRMap& f, const ComplexMatrix& z0, const PullbackOptions& options) {
  ChartOptions co;
  co.gauge_seed = options.source_gauge_seed;
  co.gauge_scale = options.gauge_scale;
  const ChartField chart = chart_through(f.source(), z0, options.order, co);
  return pullback_forms(f, chart, options.target_gauge_seed, options.gauge_scale);
}

void apply_source_change(PullbackData& data, const ComplexMatrix& U) {
  require_shape(U, data.source.dim(), data.source.dim(), "apply_source_change");
  data.source_frame = U * data.source_frame;
  recompute(data);
}

void apply_target_change(PullbackData& data, const ComplexMatrix& U) {
  require_shape(U, data.target.dim(), data.target.dim(), "apply_target_change");
  data.target_frame = U * data.target_frame;
  recompute(data);
}

// ---------------------------------------------------------------------------
// first normalization step

ComplexMatrix first_h_vectors(const PullbackData& d) {
  const SignatureForm& F = d.source;
  const SignatureForm& T = d.target;
  ComplexMatrix H(F.n(), T.n());
  for (int J = 0; J < T.n(); ++J) {
    const Decomposition dec = point_basis_decompose(functional(d.target_connection, 0, T.x_begin() + J), d.basis);
    for (int j = 0; j < F.n(); ++j) H(j, J) = dec.coefficients(point_basis_theta(F, 0, j));
  }
  return H;
}

NormalizationReport normalize_step1(PullbackData& d, bool bound_ok, const NormalizationTolerances& tol) {
  const SignatureForm& F = d.source;
  const SignatureForm& T = d.target;
  const int q = F.q(), n = F.n(), qt = T.q(), nt = T.n();
  NormalizationReport rep;
  rep.bound_ok = bound_ok;

  // (a) a diagonal Phi_a^a that does not vanish, moved to the first slot.
  int a = -1;
  for (int k = 0; k < qt && a < 0; ++k)
    if (functional(d.target_connection, k, T.y_begin() + k).cwiseAbs().maxCoeff() > tol.vanish) a = k;
  if (a < 0) throw ConstraintError("not an embedding at this point: every diagonal Phi_a^a vanishes");
  rep.target_index = a;
  if (a != 0) {
    ComplexMatrix P = ComplexMatrix::Identity(qt, qt);
    P.row(0).swap(P.row(a));
    const FrameChange swap = FrameChange::position(P, P);
    apply_target_change(d, swap.matrix(T));
    rep.target_changes.push_back(swap);
  }

  // (b) Phi_1^1 = c_alpha^beta phi_beta^alpha.
  auto decompose_phi11 = [&]() {
    const Decomposition dec = point_basis_decompose(functional(d.target_connection, 0, T.y_begin()), d.basis);
    ComplexMatrix c(q, q);
    for (int al = 0; al < q; ++al)
      for (int be = 0; be < q; ++be) c(al, be) = dec.coefficients(point_basis_phi(F, be, al));
    return c;
  };
  rep.c_matrix = decompose_phi11();

  // (c)
  rep.hermitian_defect = max_abs(rep.c_matrix - rep.c_matrix.adjoint());
  if (rep.hermitian_defect > tol.hermitian * std::max(1.0, max_abs(rep.c_matrix)))
    throw ConstraintError("c matrix is not Hermitian (defect " + std::to_string(rep.hermitian_defect) + ")");
  const ComplexMatrix ch = 0.5 * (rep.c_matrix + rep.c_matrix.adjoint());

  // (d) c -> W c W^* diagonal, descending.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(ch);
  rep.c_diag = es.eigenvalues().reverse();
  ComplexMatrix V = es.eigenvectors().rowwise().reverse();
  ComplexMatrix W = V.adjoint();
  W *= std::polar(1.0, -std::arg(W.determinant()) / q);
  const FrameChange diag = FrameChange::position(W, W);
  apply_source_change(d, diag.matrix(F));
  rep.source_changes.push_back(diag);

  // (e)
  const double c1 = rep.c_diag(0);
  const double scale = std::max(std::abs(c1), std::abs(rep.c_diag(q - 1)));
  if (!(c1 > tol.eigen * std::max(1.0, scale))) throw ConstraintError("no positive eigenvalue in c");
  for (int al = 0; al < q; ++al) {
    if (rep.c_diag(al) > tol.eigen * scale) ++rep.r;
    else if (rep.c_diag(al) < -tol.eigen * scale)
      throw ConstraintError("negative retained eigenvalue in c: " + std::to_string(rep.c_diag(al)));
  }

  // (f) source dilation so that c_1 = 1.
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(q);
  lambda(0) = 1.0 / std::sqrt(c1);
  const FrameChange dil = FrameChange::dilation(lambda);
  apply_source_change(d, dil.matrix(F));
  rep.source_changes.push_back(dil);
  Eigen::VectorXd cn = rep.c_diag;
  cn(0) = 1.0;

  // (g) Theta_1^J = h_j^{J,alpha} theta_alpha^j mod phi.
  rep.h.assign(q, ComplexMatrix::Zero(n, nt));
  for (int J = 0; J < nt; ++J) {
    const Decomposition dec = point_basis_decompose(functional(d.target_connection, 0, T.x_begin() + J), d.basis);
    for (int al = 0; al < q; ++al)
      for (int j = 0; j < n; ++j) {
        rep.h[al](j, J) = dec.coefficients(point_basis_theta(F, al, j));
        rep.theta_bar_defect = std::max(rep.theta_bar_defect, std::abs(dec.coefficients(point_basis_theta_bar(F, al, j))));
      }
  }

  // (h) sum_J h_j^{J,alpha} conj(h_k^{J,beta}) = c_alpha delta_{alpha beta} delta_{jk}.
  for (int al = 0; al < q; ++al)
    for (int be = 0; be < q; ++be) {
      ComplexMatrix G = rep.h[al] * rep.h[be].adjoint();
      if (al == be) G -= cn(al) * ComplexMatrix::Identity(n, n);
      rep.gram_residual = std::max(rep.gram_residual, max_abs(G));
    }
  if (rep.gram_residual > tol.gram) throw ConstraintError("h-vector Gram relation violated: " + std::to_string(rep.gram_residual));

  // (i) target rotation making h_j^{J,1} = delta_{Jj}.
  rep.h_delta_residual = std::numeric_limits<double>::quiet_NaN();
  if (!bound_ok) return rep;
  rep.rank_one_ok = rep.r == 1;
  if (!rep.rank_one_ok) return rep;

  const ComplexMatrix& H = rep.h[0];
  ComplexMatrix M;
  if (nt > n) {
    // H Q = [R1^*, 0] for the QR of H^*; R1 is diagonal up to rounding.
    Eigen::HouseholderQR<ComplexMatrix> qr(H.adjoint());
    ComplexMatrix Q = qr.householderQ() * ComplexMatrix::Identity(nt, nt);
    const ComplexMatrix R1 = qr.matrixQR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
      const Complex dj = R1(j, j);
      Q.col(j) *= dj / std::abs(dj);
    }
    ComplexMatrix U = Q.adjoint();
    U.row(nt - 1) *= std::polar(1.0, -std::arg(U.determinant()));
    const FrameChange rot = FrameChange::rotation(U);
    M = rot.raw_matrix(T);
    rep.target_changes.push_back(rot);
  } else {
    const ComplexMatrix Hu = unitary_part(H);
    const double psi = -std::arg(Hu.determinant()) / (n + 2);
    ComplexMatrix Wt = ComplexMatrix::Identity(qt, qt);
    Wt(0, 0) = std::polar(1.0, psi);
    const FrameChange pos = FrameChange::position(Wt, Wt);
    const FrameChange rot = FrameChange::rotation(std::polar(1.0, psi) * Hu);
    M = rot.raw_matrix(T) * pos.raw_matrix(T);
    rep.target_changes.push_back(pos);
    rep.target_changes.push_back(rot);
  }
  apply_target_change(d, M);
  rep.rotation_applied = true;
  ComplexMatrix delta = ComplexMatrix::Identity(n, nt);
  rep.h_delta_residual = max_abs(first_h_vectors(d) - delta);
  return rep;
}

// ---------------------------------------------------------------------------
// extension along the standard embedding

MatrixJet extend_frame(const SignatureForm& F, const SignatureForm& T, const MatrixJet& A) {
  if (A.rows() != F.dim() || A.cols() != F.dim()) throw DimensionError("extend_frame: wrong source frame shape");
  const int q = F.q(), p = F.p(), qt = T.q(), n = F.n(), nt = T.n();
  const int r2 = qt - q;
  if (r2 < 0 || nt < n) throw ConstraintError("extend_frame: target too small for the standard embedding");
  MatrixJet E(A.space(), T.dim(), T.dim());
  for (std::size_t k = 0; k < A.coeffs().size(); ++k)
    for (int L = 0; L < F.dim(); ++L)
      for (int c = 0; c < F.dim(); ++c) E.coeffs()[k](kappa(F, T, L), iota(F, T, c)) = A.coeffs()[k](L, c);
  ComplexMatrix& E0 = E.coeffs()[0];
  const double s = M_SQRT1_2;
  for (int b = 0; b < r2; ++b) {
    E0(q + b, q + b) = s;
    E0(q + b, qt + p + b) = s;
    E0(T.y_begin() + q + b, q + b) = -s;
    E0(T.y_begin() + q + b, qt + p + b) = s;
  }
  for (int k = 0; k < nt - n; ++k) E0(T.x_begin() + n + k, qt + p + r2 + k) = 1.0;
  const Complex det = E0.determinant();
  if (nt > n) {
    E0.row(T.x_begin() + n) *= std::polar(1.0, -std::arg(det));
  } else if (r2 > 0) {
    const Complex ph = std::polar(1.0, -0.5 * std::arg(det));
    E0.row(q) *= ph;
    E0.row(T.y_begin() + q) *= ph;
  }
  return E;
}

ComplexMatrix extend_frame(const SignatureForm& F, const SignatureForm& T, const ComplexMatrix& A) {
  return extend_frame(F, T, MatrixJet::constant(JetSpace::get(1, 0), A)).value();
}

std::vector<MatrixJet> extend_connection(const SignatureForm& F, const SignatureForm& T, const ConnectionMatrix& pi) {
  std::vector<MatrixJet> out;
  for (const auto& c : pi.components) {
    MatrixJet e(c.space(), T.dim(), T.dim());
    for (std::size_t k = 0; k < c.coeffs().size(); ++k)
      for (int L = 0; L < F.dim(); ++L)
        for (int G = 0; G < F.dim(); ++G) e.coeffs()[k](kappa(F, T, L), kappa(F, T, G)) = c.coeffs()[k](L, G);
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// aligned state

AlignedStateReport verify_aligned_state(const CRMap& f, const PullbackData& d, const EquivalenceReport* eq, double tol) {
  const SignatureForm& F = d.source;
  const SignatureForm& T = d.target;
  const int q = F.q(), n = F.n(), qt = T.q(), nt = T.n();
  AlignedStateReport rep;

  MatrixJet ref(d.source_frame.space(), T.dim(), T.dim());
  if (eq && eq->equivalent) {
    const ComplexMatrix h = eq->g.inverse(), hp = eq->gprime.inverse();
    ref = extend_frame(F, T, d.source_frame * h.transpose()) * hp.transpose();
    rep.from_equivalence = true;
  } else {
    const MatrixJet E = extend_frame(F, T, d.source_frame);
    ref = E * (E.value().inverse() * d.target_frame.value());
  }
  const MatrixJet w = f.evaluate_jet(point_jet_of_frame(F, d.source_frame));
  const MatrixJet At = graph_project(T, lift_jet(w).transpose(), ref);
  const ConnectionMatrix Pi = connection_from_frame_field(T, At);
  const auto ext = extend_connection(F, T, d.source_connection);

  const int X = T.x_begin(), Y = T.y_begin();
  for (int i = 0; i < Pi.num_vars(); ++i) {
    const MatrixJet D = Pi.components[i] - ext[i];
    for (const auto& K : D.coeffs()) {
      rep.phi = std::max(rep.phi, max_abs(K.block(0, Y, qt, qt)));
      rep.theta = std::max(rep.theta, max_abs(K.block(0, X, qt, nt)));
      rep.psi = std::max(rep.psi, max_abs(K.block(q, 0, qt - q, q)));
      rep.omega = std::max(rep.omega, max_abs(K.block(X, X + n, nt, nt - n)));
      rep.sigma = std::max(rep.sigma, max_abs(K.block(Y, X + n, qt, nt - n)));
    }
  }
  rep.max = std::max({rep.phi, rep.theta, rep.psi, rep.omega, rep.sigma});
  rep.pass = rep.max <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// plane analysis

PlaneAnalysisReport plane_analysis(const CRMap& f, const std::vector<ComplexMatrix>& samples, double angle_tol) {
  const SignatureForm& F = f.source();
  const SignatureForm& T = f.target();
  const int N = T.dim(), qt = T.q();
  if (samples.empty()) throw ConstraintError("plane_analysis: no samples");

  ComplexMatrix perp_sum = ComplexMatrix::Zero(N, N), proj_sum = ComplexMatrix::Zero(N, N);
  for (const auto& z : samples) {
    Eigen::HouseholderQR<ComplexMatrix> qr(lift(f.evaluate(z)));
    const ComplexMatrix B = qr.householderQ() * ComplexMatrix::Identity(N, qt);
    const ComplexMatrix P = B * B.adjoint();
    proj_sum += P;
    perp_sum += ComplexMatrix::Identity(N, N) - P;
  }

  PlaneAnalysisReport rep;
  rep.samples = static_cast<int>(samples.size());
  // Stacked complements P_s^perp have Gram sum_s P_s^perp; its null space is the common subspace.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> common(0.5 * (perp_sum + perp_sum.adjoint()));
  for (Eigen::Index i = 0; i < N; ++i)
    if (std::sqrt(std::max(0.0, common.eigenvalues()(i))) <= angle_tol) ++rep.v2_dim;
  rep.V2 = common.eigenvectors().leftCols(rep.v2_dim);

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> sum(0.5 * (proj_sum + proj_sum.adjoint()));
  const double top = std::sqrt(std::max(0.0, sum.eigenvalues()(N - 1)));
  for (Eigen::Index i = 0; i < N; ++i)
    if (std::sqrt(std::max(0.0, sum.eigenvalues()(i))) > angle_tol * top) ++rep.span_dim;
  const ComplexMatrix span = sum.eigenvectors().rightCols(rep.span_dim);

  // V1: Euclidean complement of V2 inside the span.
  const ComplexMatrix rest = span - rep.V2 * (rep.V2.adjoint() * span);
  Eigen::JacobiSVD<ComplexMatrix> svd(rest, Eigen::ComputeThinU);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > angle_tol) ++rep.v1_dim;
  rep.V1 = svd.matrixU().leftCols(rep.v1_dim);

  if (rep.v1_dim > 0) {
    const ComplexMatrix G = rep.V1.adjoint() * T.J() * rep.V1;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> sig(0.5 * (G + G.adjoint()), Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < sig.eigenvalues().size(); ++i) {
      if (sig.eigenvalues()(i) > 1e-8) ++rep.signature_pos;
      else if (sig.eigenvalues()(i) < -1e-8) ++rep.signature_neg;
    }
  }
  if (rep.v2_dim > 0) rep.v2_null_residual = max_abs(rep.V2.adjoint() * T.J() * rep.V2);
  if (rep.v1_dim + rep.v2_dim > 0) {
    ComplexMatrix both(N, rep.v1_dim + rep.v2_dim);
    both << rep.V1, rep.V2;
    const auto sv = Eigen::JacobiSVD<ComplexMatrix>(both).singularValues();
    rep.v1_v2_overlap = sv(sv.size() - 1);
  }
  rep.pattern_ok = rep.v2_dim == qt - F.q() && rep.span_dim == F.p() + qt && rep.v1_dim == F.dim() &&
                   rep.signature_pos == F.p() && rep.signature_neg == F.q() && rep.v2_null_residual <= 1e-8;
  return rep;
}

PlaneAnalysisReport plane_analysis(const CRMap& f, std::uint64_t seed, std::size_t count, double angle_tol) {
  const SignatureForm& F = f.source();
  const std::size_t minimum = minimum_plane_samples(F);
  if (count == 0) count = minimum;
  if (count < minimum) throw ConstraintError("plane_analysis: need at least " + std::to_string(minimum) + " samples");
  PlaneAnalysisReport rep = plane_analysis(f, sample_boundary(F, Rng::derive(seed, 0).next_u64(), count), angle_tol);
  const PlaneAnalysisReport twice =
      plane_analysis(f, sample_boundary(F, Rng::derive(seed, 1).next_u64(), 2 * count), angle_tol);
  rep.stable = rep.v1_dim == twice.v1_dim && rep.v2_dim == twice.v2_dim && rep.span_dim == twice.span_dim &&
               rep.signature_pos == twice.signature_pos && rep.signature_neg == twice.signature_neg;
  if (!rep.stable) throw NumericError("plane_analysis: dimension estimates not converged between sample batches");
  return rep;
}

// ---------------------------------------------------------------------------
// equivalence

namespace {

// Target automorphism h' carrying the standard (V1, V2) structure onto the
// analysed one: J-orthonormal bases of V1 by sign, null pairs built on V2 and
// a dual null frame, and a positive completion.
std::optional<ComplexMatrix> witt_completion(const SignatureForm& F, const SignatureForm& T, const PlaneAnalysisReport& pl,
                                             std::string& why) {
  const int q = F.q(), p = F.p(), qt = T.q(), N = T.dim();
  const int r2 = qt - q;
  const int extras = T.n() - F.n();
  if (r2 < 0 || extras < 0) {
    why = "target has no room for the standard embedding";
    return std::nullopt;
  }
  const ComplexMatrix& J = T.J();
  const ComplexMatrix& B1 = pl.V1;
  const ComplexMatrix& nv = pl.V2;

  // J-orthonormal basis of V1, negative vectors first.
  const ComplexMatrix G1 = B1.adjoint() * J * B1;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (G1 + G1.adjoint()));
  ComplexMatrix u(N, F.dim());
  for (int k = 0; k < F.dim(); ++k) u.col(k) = B1 * es.eigenvectors().col(k) / std::sqrt(std::abs(es.eigenvalues()(k)));

  // Dual null vectors m with <n_b, m_c> = delta, null, and J-orthogonal to V1.
  ComplexMatrix m(N, r2);
  if (r2 > 0) {
    const ComplexMatrix P1 = B1 * (G1.inverse() * (B1.adjoint() * J));
    const ComplexMatrix s = (ComplexMatrix::Identity(N, N) - P1) * (J * nv);
    const ComplexMatrix Mx = nv.adjoint() * J * s;
    const ComplexMatrix m0 = s * Mx.inverse();
    const ComplexMatrix Gm = m0.adjoint() * J * m0;
    m = m0 - nv * (0.5 * (Gm + Gm.adjoint()));
  }

  // Positive completion: J-orthogonal to V1, V2 and the dual vectors.
  ComplexMatrix used(N, F.dim() + 2 * r2);
  used << B1, nv, m;
  ComplexMatrix x = null_space(used.adjoint() * J, 1e-8);
  if (x.cols() != extras) {
    why = "completion has the wrong dimension";
    return std::nullopt;
  }
  if (extras > 0) {
    const ComplexMatrix Gx = x.adjoint() * J * x;
    Eigen::LLT<ComplexMatrix> llt(0.5 * (Gx + Gx.adjoint()));
    if (llt.info() != Eigen::Success) {
      why = "completion is not positive definite";
      return std::nullopt;
    }
    x = x * llt.matrixU().solve(ComplexMatrix::Identity(extras, extras));
  }

  ComplexMatrix h = ComplexMatrix::Zero(N, N);
  for (int k = 0; k < q; ++k) h.col(k) = u.col(k);
  for (int k = 0; k < p; ++k) h.col(qt + k) = u.col(q + k);
  for (int b = 0; b < r2; ++b) {
    h.col(q + b) = (nv.col(b) - m.col(b)) * M_SQRT1_2;
    h.col(qt + p + b) = (nv.col(b) + m.col(b)) * M_SQRT1_2;
  }
  for (int k = 0; k < extras; ++k) h.col(qt + p + r2 + k) = x.col(k);
  h *= std::polar(1.0, -std::arg(h.determinant()) / N);
  if (max_abs(h.adjoint() * J * h - J) > 1e-8) {
    why = "completion is not a form isometry";
    return std::nullopt;
  }
  return h;
}

}  // namespace

EquivalenceReport solve_linear_equivalence(const CRMap& f, const PlaneAnalysisReport& pl, std::uint64_t seed,
                                           std::size_t verify_samples, double tol, int witness_budget) {
  const SignatureForm& F = f.source();
  const SignatureForm& T = f.target();
  const int q = F.q(), p = F.p(), N = F.dim(), qt = T.q();
  EquivalenceReport rep;
  auto undecided = [&](std::string why) {
    rep.status = "undecided";
    rep.diagnostic = std::move(why);
    if (auto w = injectivity_witness(f, Rng::derive(seed, 9).next_u64(), witness_budget)) {
      rep.witness = *w;
      rep.status = "inequivalent";
    }
    return rep;
  };

  if (!pl.pattern_ok) return undecided("image planes do not have the (V1, V2) structure of the standard embedding");
  std::string why;
  const auto hp = witt_completion(F, T, pl, why);
  if (!hp) return undecided(why);
  const ComplexMatrix gp = hp->inverse();

  // Induced plane map in source coordinates, fitted by a linear k with k L(z) in the plane.
  const auto samples = sample_boundary(F, Rng::derive(seed, 1).next_u64(), 3 * minimum_plane_samples(F));
  std::vector<int> rows(N);
  for (int c = 0; c < N; ++c) rows[c] = iota(F, T, c);
  ComplexMatrix stack(static_cast<Eigen::Index>(samples.size()) * N * q, N * N);
  Eigen::Index row = 0;
  for (const auto& z : samples) {
    const ComplexMatrix plane = gp * lift(f.evaluate(z));
    ComplexMatrix proj(N, qt);
    for (int c = 0; c < N; ++c) proj.row(c) = plane.row(rows[c]);
    Eigen::JacobiSVD<ComplexMatrix> svd(proj, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() > q && sv(q) > 1e-8 * sv(0)) return undecided("projected image planes are not q-dimensional");
    const ComplexMatrix Q = svd.matrixU().leftCols(q);
    const ComplexMatrix perp = ComplexMatrix::Identity(N, N) - Q * Q.adjoint();
    const ComplexMatrix L = lift(z);
    // vec(P k L) = (L^T kron P) vec(k)
    for (int a = 0; a < q; ++a)
      for (int i = 0; i < N; ++i, ++row)
        for (int c = 0; c < N; ++c)
          for (int r = 0; r < N; ++r) stack(row, c * N + r) = L(c, a) * perp(i, r);
  }
  Eigen::BDCSVD<ComplexMatrix> svd(stack, Eigen::ComputeThinV);
  const Eigen::VectorXcd kv = svd.matrixV().col(N * N - 1);
  ComplexMatrix k = Eigen::Map<const ComplexMatrix>(kv.data(), N, N);
  const double mu = (F.J() * (k.adjoint() * F.J() * k)).trace().real() / N;
  if (!(mu > 0.0)) return undecided("plane map is not induced by a form isometry");
  k /= std::sqrt(mu);
  k *= std::polar(1.0, -std::arg(k.determinant()) / N);
  const ComplexMatrix g = k.inverse();

  rep.g = g;
  rep.gprime = gp;
  const auto std_map = standard_embedding(p, q, T.p(), qt);
  try {
    for (const auto& z : sample_boundary(F, Rng::derive(seed, 2).next_u64(), verify_samples)) {
      const ComplexMatrix w = automorphism_action(T, gp, f.evaluate(automorphism_action(F, g, z)));
      rep.residual = std::max(rep.residual, max_abs(w - std_map->evaluate(z)));
    }
  } catch (const NumericError& e) {
    return undecided(std::string("verification sample left the chart: ") + e.what());
  }
  if (!(rep.residual <= tol)) {
    const double r = rep.residual;
    undecided("composed map differs from the standard embedding (residual " + std::to_string(r) + ")");
    rep.residual = r;
    return rep;
  }
  rep.status = "equivalent";
  rep.equivalent = true;
  return rep;
}

std::optional<Witness> injectivity_witness(const CRMap& f, std::uint64_t seed, int budget) {
  const SignatureForm& F = f.source();
  const int p = F.p(), q = F.q();
  Rng rng(seed);
  auto into_domain = [](ComplexMatrix z) {
    const double s = Eigen::JacobiSVD<ComplexMatrix>(z).singularValues()(0);
    if (s > 0.0) z *= 0.9 / s;
    return z;
  };
  auto test = [&](const ComplexMatrix& z1, const ComplexMatrix& z2) -> std::optional<Witness> {
    Witness w{z1, z2, max_abs(f.evaluate(z1) - f.evaluate(z2)), max_abs(z1 - z2)};
    if (w.image_gap <= 1e-12 && w.point_gap > 1e-6) return w;
    return std::nullopt;
  };
  int spent = 0;
  // One entry kept in a column, the rest of that column zero, that entry negated.
  for (int c = 0; c < q; ++c)
    for (int r = 0; r < p; ++r)
      for (int trial = 0; trial < 2 && spent < budget; ++trial, ++spent) {
        ComplexMatrix z = rng.complex_gaussian(p, q);
        z.col(c).setZero();
        z(r, c) = rng.complex_normal();
        z = into_domain(z);
        ComplexMatrix z2 = z;
        z2(r, c) = -z2(r, c);
        if (auto w = test(z, z2)) return w;
      }
  // Random points against sign flips of a column or a row.
  while (spent < budget) {
    const ComplexMatrix z = into_domain(rng.complex_gaussian(p, q));
    ComplexMatrix z2 = z;
    const auto pick = rng.next_u64();
    if (pick % 2 == 0) z2.col(static_cast<Eigen::Index>((pick / 2) % q)) *= -1.0;
    else z2.row(static_cast<Eigen::Index>((pick / 2) % p)) *= -1.0;
    ++spent;
    if (auto w = test(z, z2)) return w;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// pipeline

RigidityReport run_pipeline(const CRMap& f, const PipelineOptions& o) {
  RigidityReport rep;
  rep.map_id = f.id();
  rep.source = f.source();
  rep.target = f.target();
  rep.bound_ok = bound_holds(rep.source, rep.target);
  const std::uint64_t section = o.section_seed != 0 ? o.section_seed : Rng::derive(o.seed, 100).next_u64();

  const auto points = sample_boundary(rep.source, Rng::derive(o.seed, 1).next_u64(), o.basepoints);
  std::optional<PullbackData> first;
  rep.h_residual = std::numeric_limits<double>::quiet_NaN();
  bool all_r1 = true;
  for (std::size_t b = 0; b < points.size(); ++b) {
    PullbackOptions po;
    po.order = o.jet_order;
    po.source_gauge_seed = Rng::derive(section, 2 * b).next_u64() | 1;
    po.target_gauge_seed = Rng::derive(section, 2 * b + 1).next_u64() | 1;
    PullbackData data = run_stage("pullback", [&] { return pullback_forms(f, points[b], po); });
    BasepointResult br;
    br.z0 = points[b];
    br.phi_span_residual = data.phi_span_residual;
    br.normalization = run_stage("normalize_step1", [&] { return normalize_step1(data, rep.bound_ok); });
    if (br.normalization.rotation_applied)
      rep.h_residual = std::isnan(rep.h_residual) ? br.normalization.h_delta_residual
                                                  : std::max(rep.h_residual, br.normalization.h_delta_residual);
    all_r1 = all_r1 && br.normalization.rank_one_ok;
    if (b == 0) {
      rep.r = br.normalization.r;
      first = std::move(data);
    }
    rep.basepoints.push_back(std::move(br));
  }
  rep.rank_one = rep.bound_ok && all_r1 && !points.empty() && rep.h_residual <= 1e-8;

  rep.planes = run_stage("plane_analysis", [&] { return plane_analysis(f, Rng::derive(o.seed, 3).next_u64(), o.plane_samples); });
  rep.equivalence = run_stage("solve_linear_equivalence", [&] {
    return solve_linear_equivalence(f, rep.planes, Rng::derive(o.seed, 4).next_u64(), o.verify_samples, o.equivalence_tol,
                                    o.witness_budget);
  });
  if (first)
    rep.aligned = run_stage("verify_aligned_state",
                            [&] { return verify_aligned_state(f, *first, &rep.equivalence, o.aligned_tol); });
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json matrix_json(const ComplexMatrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back({M(i, j).real(), M(i, j).imag()});
    rows.push_back(r);
  }
  return rows;
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json changes_json(const std::vector<FrameChange>& changes) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : changes) out.push_back(to_string(c.kind));
  return out;
}

}  // namespace

nlohmann::json report_to_json(const RigidityReport& r) {
  using nlohmann::json;
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["rng"] = Rng::kName;
  j["map_id"] = r.map_id;
  j["source"] = {r.source.p(), r.source.q()};
  j["target"] = {r.target.p(), r.target.q()};
  j["bound_ok"] = r.bound_ok;
  json bps = json::array();
  for (const auto& b : r.basepoints) {
    const auto& n = b.normalization;
    json e;
    e["z0"] = matrix_json(b.z0);
    e["phi_span_residual"] = b.phi_span_residual;
    e["target_index"] = n.target_index;
    e["c_diag"] = std::vector<double>(n.c_diag.data(), n.c_diag.data() + n.c_diag.size());
    e["r"] = n.r;
    e["hermitian_defect"] = n.hermitian_defect;
    e["theta_bar_defect"] = n.theta_bar_defect;
    e["gram_residual"] = n.gram_residual;
    e["h_delta_residual"] = number_or_null(n.h_delta_residual);
    e["source_changes"] = changes_json(n.source_changes);
    e["target_changes"] = changes_json(n.target_changes);
    bps.push_back(e);
  }
  j["basepoints"] = bps;
  j["c_matrix"] = r.basepoints.empty() ? json(nullptr) : matrix_json(r.basepoints[0].normalization.c_matrix);
  j["r"] = r.r;
  j["h_residual"] = number_or_null(r.h_residual);
  j["lemma41"] = r.rank_one;
  j["prop61_residuals"] = {{"phi", r.aligned.phi},       {"theta", r.aligned.theta}, {"psi", r.aligned.psi},
                           {"omega", r.aligned.omega},   {"sigma", r.aligned.sigma}, {"max", r.aligned.max},
                           {"pass", r.aligned.pass},     {"reference", r.aligned.from_equivalence ? "equivalence" : "basepoint"}};
  j["plane_dims"] = {{"samples", r.planes.samples},
                     {"V1", r.planes.v1_dim},
                     {"V2", r.planes.v2_dim},
                     {"span", r.planes.span_dim},
                     {"signature_V1", {r.planes.signature_pos, r.planes.signature_neg}},
                     {"V2_null_residual", r.planes.v2_null_residual},
                     {"stable", r.planes.stable},
                     {"pattern_ok", r.planes.pattern_ok}};
  json eq;
  eq["status"] = r.equivalence.status;
  eq["residual"] = r.equivalence.residual;
  if (!r.equivalence.diagnostic.empty()) eq["diagnostic"] = r.equivalence.diagnostic;
  if (r.equivalence.equivalent) {
    eq["g"] = matrix_json(r.equivalence.g);
    eq["g_prime"] = matrix_json(r.equivalence.gprime);
  }
  if (r.equivalence.witness) {
    const auto& w = *r.equivalence.witness;
    eq["witness"] = {{"z1", matrix_json(w.z1)}, {"z2", matrix_json(w.z2)}, {"image_gap", w.image_gap}, {"point_gap", w.point_gap}};
  }
  j["equivalence"] = eq;
  return j;
}

}  // namespace shilov
