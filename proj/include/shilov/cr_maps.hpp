#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shilov/geometry.hpp"
#include "shilov/hermitian.hpp"
#include "shilov/jet.hpp"

namespace shilov {

// --- automorphisms ------------------------------------------------------------

/// g with g^* J g = J and det g = 1, acting on C^{p+q} in lift coordinates.
struct Automorphism {
  ComplexMatrix g;
};

/// Throws ConstraintError unless g^* J g = J and det g = 1 within tol.
void validate_automorphism(const SignatureForm& F, const ComplexMatrix& g, double tol = 1e-9);
/// z' = bottom(g L) top(g L)^{-1} with L = (I_q over z). Throws NumericError if top(g L) is singular.
ComplexMatrix automorphism_action(const SignatureForm& F, const ComplexMatrix& g, const ComplexMatrix& z);
/// exp(s J K) for a random trace-free anti-Hermitian K.
ComplexMatrix random_automorphism(const SignatureForm& F, std::uint64_t seed, double scale = 0.4);

/// Lift and point extraction on jets.
MatrixJet lift_jet(const MatrixJet& z);
MatrixJet point_jet_from_columns(const SignatureForm& F, const MatrixJet& L);
/// z(t) for a frame field A(t): the Z rows give the lift columns.
MatrixJet point_jet_of_frame(const SignatureForm& F, const MatrixJet& A);

// --- maps ----------------------------------------------------------------------

/// A map from p x q matrices to p' x q' matrices, with numeric and jet evaluation.
class CRMap {
 public:
  CRMap(SignatureForm source, SignatureForm target) : source_(std::move(source)), target_(std::move(target)) {}
  virtual ~CRMap() = default;

  const SignatureForm& source() const { return source_; }
  const SignatureForm& target() const { return target_; }

  virtual ComplexMatrix evaluate(const ComplexMatrix& z) const = 0;
  virtual MatrixJet evaluate_jet(const MatrixJet& z) const = 0;
  virtual std::string id() const = 0;

 private:
  SignatureForm source_;
  SignatureForm target_;
};

/// One monomial coeff * prod z_{ij}^{k} * prod conj(z_{ij})^{l}.
struct MapTerm {
  Complex coeff{0.0, 0.0};
  std::vector<std::pair<int, int>> powers;       // (flat index i*q + j, exponent)
  std::vector<std::pair<int, int>> conj_powers;  // same, for conj(z)
};

struct MapEntry {
  int row = 0, col = 0;
  std::vector<MapTerm> terms;
};

/// Target entries given by polynomials in the source entries (and optionally
/// their conjugates, used only for negative controls).
class PolyMatrixMap : public CRMap {
 public:
  PolyMatrixMap(SignatureForm source, SignatureForm target, std::vector<MapEntry> entries, std::string id = "poly");

  const std::vector<MapEntry>& entries() const { return entries_; }
  int max_degree() const;
  bool holomorphic() const;

  ComplexMatrix evaluate(const ComplexMatrix& z) const override;
  MatrixJet evaluate_jet(const MatrixJet& z) const override;
  std::string id() const override { return id_; }

 private:
  std::vector<MapEntry> entries_;
  std::string id_;
};

/// z -> post( core( pre(z) ) ) with optional automorphisms on each side.
class ComposedMap : public CRMap {
 public:
  ComposedMap(std::shared_ptr<const CRMap> core, std::optional<ComplexMatrix> pre, std::optional<ComplexMatrix> post);

  const CRMap& core() const { return *core_; }
  const std::optional<ComplexMatrix>& pre() const { return pre_; }
  const std::optional<ComplexMatrix>& post() const { return post_; }

  ComplexMatrix evaluate(const ComplexMatrix& z) const override;
  MatrixJet evaluate_jet(const MatrixJet& z) const override;
  std::string id() const override;

 private:
  std::shared_ptr<const CRMap> core_;
  std::optional<ComplexMatrix> pre_;
  std::optional<ComplexMatrix> post_;
};

/// [[z, 0], [0, I_{q'-q}], [0, 0]]. Requires q' >= q and p' >= p + (q' - q).
std::shared_ptr<PolyMatrixMap> standard_embedding(int p, int q, int pprime, int qprime);

/// Generalized Whitney map. Rows i < p-1 copy z_{i,a}; rows p-1+i carry
/// z_{i,0} z_{p-1,a}; an I_m block sits in the lower right. Target is (2p-1+m) x (q'+m).
std::shared_ptr<PolyMatrixMap> whitney_map(int p, int q, int qprime, int m);

/// Column a of the output is sphere_maps[a] applied to source column columns[a],
/// placed in its own diagonal block. Each sphere map must be a (p,1) -> (m_a,1) map;
/// throws ConstraintError if one fails a sphere-to-sphere sampling check.
std::shared_ptr<PolyMatrixMap> block_diagonal_map(int p, int q, const std::vector<std::shared_ptr<PolyMatrixMap>>& sphere_maps,
                                                  const std::vector<int>& columns);

/// Whitney sphere map in the first column, identity sphere maps in the others, column a -> a.
std::shared_ptr<PolyMatrixMap> default_block_diagonal_map(int p, int q);

/// Adds eps * conj(z) to the standard embedding's z block: a non-CR control.
std::shared_ptr<PolyMatrixMap> conjugate_perturbation(int p, int q, int pprime, int qprime, Complex eps);

// --- verification ----------------------------------------------------------------

struct BoundaryReport {
  std::size_t samples = 0;
  double max_residual = 0.0;
  bool pass = false;
};
BoundaryReport verify_boundary_preserving(const CRMap& f, const std::vector<ComplexMatrix>& samples, double tol = 1e-10);

struct CRReport {
  double contact_residual = 0.0;     // |w0^* dw(T)| / |dz(T)|
  double holomorphic_residual = 0.0; // |d conj(w)(T)| / |dz(T)|
  double cr_residual = 0.0;          // max of the two
  double min_singular_value = 0.0;   // of df on the CR subspace
  bool immersion = false;
  bool pass = false;
};
/// T runs over v - i J v for v in the chart's CR subspace.
CRReport verify_cr(const CRMap& f, const ChartField& chart, double tol = 1e-9, double immersion_tol = 1e-8);

// --- JSON ----------------------------------------------------------------------

nlohmann::json map_to_json(const PolyMatrixMap& f);
nlohmann::json map_to_json(const ComposedMap& f);
/// Throws ConstraintError on schema violations.
std::shared_ptr<CRMap> map_from_json(const nlohmann::json& j);

}  // namespace shilov
