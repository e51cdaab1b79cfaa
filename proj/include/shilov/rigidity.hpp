#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shilov/cr_maps.hpp"
#include "shilov/frames.hpp"
#include "shilov/geometry.hpp"
#include "shilov/maurer_cartan.hpp"

namespace shilov {

/// p' - q' < 2 (p - q).
inline bool bound_holds(const SignatureForm& source, const SignatureForm& target) {
  return target.n() < 2 * source.n();
}

// --- pullback -------------------------------------------------------------------

/// Source frame field A(t) and a target frame field A'(t) along f(z(t)), with
/// both connections. Capital blocks are the target connection's blocks read as
/// functionals on the source parameter directions.
struct PullbackData {
  SignatureForm source;
  SignatureForm target;
  ComplexMatrix z0, w0;
  MatrixJet source_frame;
  MatrixJet target_frame;
  ConnectionMatrix source_connection;
  ConnectionMatrix target_connection;
  /// Rows phi, theta, conj(theta) of the source at t = 0 (see point_basis).
  ComplexMatrix basis;
  /// max over target (a, b) of the least-squares residual of Phi_a^b against the source phi's.
  double phi_span_residual = 0.0;
};

struct PullbackOptions {
  int order = kDefaultJetOrder;
  /// Zero leaves the corresponding section ungauged.
  std::uint64_t source_gauge_seed = 0;
  std::uint64_t target_gauge_seed = 0;
  double gauge_scale = 0.5;
};

/// Throws NumericError if the image point is degenerate for the target frame.
PullbackData pullback_forms(const CRMap& f, const ComplexMatrix& z0, const PullbackOptions& options = {});
/// Uses the chart's own frame field as the source section.
PullbackData pullback_forms(const CRMap& f, const ChartField& chart, std::uint64_t target_gauge_seed = 0,
                            double gauge_scale = 0.5);

/// Left-multiplies the source or target frame field by a constant and recomputes connections.
void apply_source_change(PullbackData& data, const ComplexMatrix& U);
void apply_target_change(PullbackData& data, const ComplexMatrix& U);

/// U(t) R(t) where U is the unipotent frame change moving the Z rows of R onto
/// the plane spanned by the rows of Lt (q' x N'). Requires the planes to agree at t = 0.
MatrixJet graph_project(const SignatureForm& target, const MatrixJet& Lt, const MatrixJet& R);

// --- first normalization step ---------------------------------------------------

struct NormalizationTolerances {
  double vanish = 1e-8;     // a functional counts as zero below this
  double hermitian = 1e-8;  // error threshold; the defect itself is reported
  double eigen = 1e-8;      // relative threshold for retained eigenvalues
  double gram = 1e-8;
};

struct NormalizationReport {
  int target_index = 0;          // a with Phi_a^a used as Phi_1^1
  ComplexMatrix c_matrix;        // before diagonalization
  Eigen::VectorXd c_diag;        // descending
  int r = 0;
  double hermitian_defect = 0.0;
  double theta_bar_defect = 0.0; // conj(theta) content of Theta_1^J
  double gram_residual = 0.0;    // of the h-vector orthogonality relation
  /// h[alpha](j, J): coefficient of theta_alpha^j in Theta_1^J, after the source changes.
  std::vector<ComplexMatrix> h;
  /// |h^{.,1} - delta| after the target rotation, recomputed from the jets; NaN when not applied.
  double h_delta_residual = 0.0;
  bool bound_ok = false;
  bool rotation_applied = false;
  bool rank_one_ok = false;  // r == 1 with the bound in force
  std::vector<FrameChange> source_changes;
  std::vector<FrameChange> target_changes;
};

/// Runs the step on data in place. Throws ConstraintError for the listed
/// failures: every diagonal Phi_a^a vanishes, c not Hermitian, a negative
/// retained eigenvalue, or a violated Gram relation.
NormalizationReport normalize_step1(PullbackData& data, bool bound_ok, const NormalizationTolerances& tol = {});

/// h[0](j, J) as an n x n' matrix read off the current data.
ComplexMatrix first_h_vectors(const PullbackData& data);

// --- standard-embedding extension -------------------------------------------------

/// Frame for the target built from a source frame: source coordinates land on
/// the first q and the next p target coordinates, the extra null pairs and
/// positive vectors are constant, and a constant phase fixes det = 1.
MatrixJet extend_frame(const SignatureForm& source, const SignatureForm& target, const MatrixJet& A);
ComplexMatrix extend_frame(const SignatureForm& source, const SignatureForm& target, const ComplexMatrix& A);
/// Target connection with the source connection in the matching rows and columns and zero elsewhere.
std::vector<MatrixJet> extend_connection(const SignatureForm& source, const SignatureForm& target,
                                         const ConnectionMatrix& pi);

// --- plane analysis --------------------------------------------------------------

struct PlaneAnalysisReport {
  int samples = 0;
  int v1_dim = 0;
  int v2_dim = 0;
  int span_dim = 0;
  int signature_pos = 0;
  int signature_neg = 0;
  double v2_null_residual = 0.0;  // ||V2^* J V2||
  double v1_v2_overlap = 0.0;     // smallest singular value of [V1 V2] (0 means dependent)
  bool stable = false;            // same dimensions with twice the samples
  ComplexMatrix V1, V2;           // orthonormal columns
  /// dim V2 = q'-q, dim span = p+q', signature of V1 = (p, q).
  bool pattern_ok = false;
};

inline std::size_t minimum_plane_samples(const SignatureForm& F) {
  return static_cast<std::size_t>(std::max(2 * F.p() * F.q(), F.p() + F.q()));
}

/// count = 0 uses minimum_plane_samples. Throws NumericError if the dimensions
/// are not reproduced with twice the samples.
PlaneAnalysisReport plane_analysis(const CRMap& f, std::uint64_t seed, std::size_t count = 0, double angle_tol = 1e-6);
PlaneAnalysisReport plane_analysis(const CRMap& f, const std::vector<ComplexMatrix>& samples, double angle_tol = 1e-6);

// --- equivalence ----------------------------------------------------------------

struct Witness {
  ComplexMatrix z1, z2;
  double image_gap = 0.0;
  double point_gap = 0.0;
};

struct EquivalenceReport {
  /// "equivalent", "inequivalent" (a witness is attached) or "undecided".
  std::string status = "undecided";
  bool equivalent = false;
  ComplexMatrix g;       // source automorphism
  ComplexMatrix gprime;  // target automorphism; g' o f o g = standard on samples
  double residual = 0.0;
  std::optional<Witness> witness;
  std::string diagnostic;
};

EquivalenceReport solve_linear_equivalence(const CRMap& f, const PlaneAnalysisReport& planes, std::uint64_t seed,
                                           std::size_t verify_samples = 500, double tol = 1e-8,
                                           int witness_budget = 2000);

/// Structured families (one entry kept in a column, its sign flipped) first, then random sign flips.
std::optional<Witness> injectivity_witness(const CRMap& f, std::uint64_t seed, int budget = 2000);

// --- aligned state ----------------------------------------------------------------

struct AlignedStateReport {
  double phi = 0.0;    // Phi_a^b - phi_a^b
  double theta = 0.0;  // Theta_a^J - theta_a^J
  double psi = 0.0;    // Psi_a^beta, a beyond q
  double omega = 0.0;  // Omega_j^K, K beyond n
  double sigma = 0.0;  // Sigma_alpha^K, K beyond n
  double max = 0.0;
  bool pass = false;
  /// True when the reference section came from recovered automorphisms.
  bool from_equivalence = false;
};

/// With an equivalence, the reference target frame is the extension of the
/// source frame carried through the recovered automorphisms; without one it is
/// the extension matched to the current target frame at t = 0. Either way it is
/// projected onto the actual image planes before the comparison.
AlignedStateReport verify_aligned_state(const CRMap& f, const PullbackData& data,
                                        const EquivalenceReport* equivalence, double tol = 1e-7);

// --- pipeline ------------------------------------------------------------------

struct PipelineOptions {
  std::uint64_t seed = 1;
  /// Seeds the gauges of the source and target sections; 0 derives it from seed.
  std::uint64_t section_seed = 0;
  int basepoints = 5;
  int jet_order = kDefaultJetOrder;
  std::size_t plane_samples = 0;
  std::size_t verify_samples = 500;
  double equivalence_tol = 1e-8;
  double aligned_tol = 1e-7;
  int witness_budget = 2000;
};

struct BasepointResult {
  ComplexMatrix z0;
  NormalizationReport normalization;
  double phi_span_residual = 0.0;
};

struct RigidityReport {
  std::string map_id;
  SignatureForm source{2, 1};
  SignatureForm target{2, 1};
  bool bound_ok = false;
  std::vector<BasepointResult> basepoints;
  int r = 0;
  double h_residual = 0.0;
  /// bound holds, r = 1 at every basepoint and the h-vectors reach delta.
  bool rank_one = false;
  AlignedStateReport aligned;
  PlaneAnalysisReport planes;
  EquivalenceReport equivalence;
};

RigidityReport run_pipeline(const CRMap& f, const PipelineOptions& options = {});

inline constexpr const char* kReportSchemaVersion = "1";
nlohmann::json report_to_json(const RigidityReport& report);
nlohmann::json matrix_json(const ComplexMatrix& M);

}  // namespace shilov
