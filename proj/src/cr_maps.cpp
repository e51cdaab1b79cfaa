#include "shilov/cr_maps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "shilov/errors.hpp"
#include "shilov/kernels.hpp"
#include "shilov/random.hpp"

namespace shilov {

// ---------------------------------------------------------------------------
// automorphisms

void validate_automorphism(const SignatureForm& F, const ComplexMatrix& g, double tol) {
  require_shape(g, F.dim(), F.dim(), "automorphism");
  if (max_abs(g.adjoint() * F.J() * g - F.J()) > tol) throw ConstraintError("automorphism: g^* J g != J");
  if (std::abs(g.determinant() - 1.0) > tol) throw ConstraintError("automorphism: det g != 1");
}

ComplexMatrix automorphism_action(const SignatureForm& F, const ComplexMatrix& g, const ComplexMatrix& z) {
  require_shape(g, F.dim(), F.dim(), "automorphism_action g");
  require_shape(z, F.p(), F.q(), "automorphism_action z");
  const ComplexMatrix L = g * lift(z);
  Eigen::FullPivLU<ComplexMatrix> lu(L.topRows(F.q()));
  if (lu.rank() < F.q()) throw NumericError("automorphism_action: image leaves the chart (singular top block)");
  return L.bottomRows(F.p()) * lu.inverse();
}

ComplexMatrix random_automorphism(const SignatureForm& F, std::uint64_t seed, double scale) {
  Rng rng(seed);
  const int N = F.dim();
  ComplexMatrix K = rng.complex_gaussian(N, N);
  K = (0.5 * (K - K.adjoint())).eval();
  ComplexMatrix X = F.J() * K;
  X -= (X.trace() / static_cast<double>(N)) * ComplexMatrix::Identity(N, N);
  X *= scale / std::sqrt(static_cast<double>(N));
  ComplexMatrix g = X.exp();
  // exp of a trace-free element has det 1 up to rounding; remove the drift.
  g *= std::polar(1.0, -std::arg(g.determinant()) / N);
  return g;
}

MatrixJet lift_jet(const MatrixJet& z) {
  const auto p = z.rows(), q = z.cols();
  MatrixJet L(z.space(), p + q, q);
  L.coeffs()[0].topRows(q).setIdentity();
  L.set_block(q, 0, z);
  return L;
}

MatrixJet point_jet_from_columns(const SignatureForm& F, const MatrixJet& L) {
  if (L.rows() != F.dim() || L.cols() != F.q()) throw DimensionError("point_jet_from_columns: wrong shape");
  const MatrixJet top = L.block(0, 0, F.q(), F.q());
  Eigen::FullPivLU<ComplexMatrix> lu(top.value());
  if (lu.rank() < F.q()) throw NumericError("point jet: plane is not a graph over the first q coordinates");
  return L.block(F.q(), 0, F.p(), F.q()) * top.inverse();
}

MatrixJet point_jet_of_frame(const SignatureForm& F, const MatrixJet& A) {
  return point_jet_from_columns(F, A.block(0, 0, F.q(), F.dim()).transpose());
}

// ---------------------------------------------------------------------------
// PolyMatrixMap

PolyMatrixMap::PolyMatrixMap(SignatureForm source, SignatureForm target, std::vector<MapEntry> entries, std::string id)
    : CRMap(std::move(source), std::move(target)), entries_(std::move(entries)), id_(std::move(id)) {
  const int pq = this->source().p() * this->source().q();
  for (const auto& e : entries_) {
    if (e.row < 0 || e.row >= this->target().p() || e.col < 0 || e.col >= this->target().q())
      throw ConstraintError("PolyMatrixMap: entry index outside the target shape");
    for (const auto& t : e.terms) {
      for (const auto& pw : t.powers)
        if (pw.first < 0 || pw.first >= pq || pw.second < 0) throw ConstraintError("PolyMatrixMap: bad monomial");
      for (const auto& pw : t.conj_powers)
        if (pw.first < 0 || pw.first >= pq || pw.second < 0) throw ConstraintError("PolyMatrixMap: bad monomial");
    }
  }
}

int PolyMatrixMap::max_degree() const {
  int d = 0;
  for (const auto& e : entries_)
    for (const auto& t : e.terms) {
      int td = 0;
      for (const auto& pw : t.powers) td += pw.second;
      for (const auto& pw : t.conj_powers) td += pw.second;
      d = std::max(d, td);
    }
  return d;
}

bool PolyMatrixMap::holomorphic() const {
  for (const auto& e : entries_)
    for (const auto& t : e.terms)
      for (const auto& pw : t.conj_powers)
        if (pw.second > 0) return false;
  return true;
}

ComplexMatrix PolyMatrixMap::evaluate(const ComplexMatrix& z) const {
  require_shape(z, source().p(), source().q(), "map evaluate");
  const int q = source().q();
  ComplexMatrix w = ComplexMatrix::Zero(target().p(), target().q());
  for (const auto& e : entries_) {
    Complex acc = 0.0;
    for (const auto& t : e.terms) {
      Complex v = t.coeff;
      for (const auto& [idx, k] : t.powers) v *= std::pow(z(idx / q, idx % q), k);
      for (const auto& [idx, k] : t.conj_powers) v *= std::pow(std::conj(z(idx / q, idx % q)), k);
      acc += v;
    }
    w(e.row, e.col) += acc;
  }
  return w;
}

MatrixJet PolyMatrixMap::evaluate_jet(const MatrixJet& z) const {
  if (z.rows() != source().p() || z.cols() != source().q()) throw DimensionError("map evaluate_jet: wrong shape");
  const int q = source().q();
  const auto space = z.space();
  std::vector<Jet> zs, zbar;
  for (int i = 0; i < source().p(); ++i)
    for (int j = 0; j < q; ++j) {
      zs.push_back(z.entry(i, j));
      zbar.push_back(zs.back().conj());
    }
  MatrixJet w(space, target().p(), target().q());
  for (const auto& e : entries_) {
    Jet acc = w.entry(e.row, e.col);
    for (const auto& t : e.terms) {
      Jet v = Jet::constant(space, t.coeff);
      for (const auto& [idx, k] : t.powers)
        for (int r = 0; r < k; ++r) v = v * zs[idx];
      for (const auto& [idx, k] : t.conj_powers)
        for (int r = 0; r < k; ++r) v = v * zbar[idx];
      acc += v;
    }
    w.set_entry(e.row, e.col, acc);
  }
  return w;
}

// ---------------------------------------------------------------------------
// ComposedMap

ComposedMap::ComposedMap(std::shared_ptr<const CRMap> core, std::optional<ComplexMatrix> pre,
                         std::optional<ComplexMatrix> post)
    : CRMap(core->source(), core->target()), core_(std::move(core)), pre_(std::move(pre)), post_(std::move(post)) {
  if (pre_) validate_automorphism(source(), *pre_);
  if (post_) validate_automorphism(target(), *post_);
}

ComplexMatrix ComposedMap::evaluate(const ComplexMatrix& z) const {
  ComplexMatrix x = pre_ ? automorphism_action(source(), *pre_, z) : z;
  ComplexMatrix w = core_->evaluate(x);
  return post_ ? automorphism_action(target(), *post_, w) : w;
}

MatrixJet ComposedMap::evaluate_jet(const MatrixJet& z) const {
  MatrixJet x = pre_ ? point_jet_from_columns(source(), *pre_ * lift_jet(z)) : z;
  MatrixJet w = core_->evaluate_jet(x);
  return post_ ? point_jet_from_columns(target(), *post_ * lift_jet(w)) : w;
}

std::string ComposedMap::id() const {
  std::string s = core_->id();
  if (pre_) s = s + "*g";
  if (post_) s = "g'*" + s;
  return s;
}

// ---------------------------------------------------------------------------
// constructors

namespace {

MapTerm monomial(Complex c, std::vector<std::pair<int, int>> powers) {
  MapTerm t;
  t.coeff = c;
  t.powers = std::move(powers);
  return t;
}

std::string shape_id(const char* name, std::initializer_list<int> args) {
  std::ostringstream s;
  s << name << "(";
  bool first = true;
  for (int a : args) {
    s << (first ? "" : ",") << a;
    first = false;
  }
  s << ")";
  return s.str();
}

}  // namespace

std::shared_ptr<PolyMatrixMap> standard_embedding(int p, int q, int pprime, int qprime) {
  SignatureForm src(p, q), tgt(pprime, qprime);
  if (qprime < q || pprime < p + (qprime - q))
    throw ConstraintError("standard_embedding: need q' >= q and p' >= p + (q' - q)");
  std::vector<MapEntry> entries;
  for (int i = 0; i < p; ++i)
    for (int a = 0; a < q; ++a) entries.push_back({i, a, {monomial(1.0, {{i * q + a, 1}})}});
  for (int b = 0; b < qprime - q; ++b) entries.push_back({p + b, q + b, {monomial(1.0, {})}});
  return std::make_shared<PolyMatrixMap>(src, tgt, std::move(entries), shape_id("standard", {p, q, pprime, qprime}));
}

std::shared_ptr<PolyMatrixMap> whitney_map(int p, int q, int qprime, int m) {
  if (qprime < 1 || qprime > q || m < 0) throw ConstraintError("whitney_map: need 1 <= q' <= q and m >= 0");
  SignatureForm src(p, q);
  SignatureForm tgt(2 * p - 1 + m, qprime + m);
  std::vector<MapEntry> entries;
  for (int i = 0; i < p - 1; ++i)
    for (int a = 0; a < qprime; ++a) entries.push_back({i, a, {monomial(1.0, {{i * q + a, 1}})}});
  for (int i = 0; i < p; ++i)
    for (int a = 0; a < qprime; ++a) {
      const int u = i * q, v = (p - 1) * q + a;
      std::vector<std::pair<int, int>> pw = u == v ? std::vector<std::pair<int, int>>{{u, 2}}
                                                   : std::vector<std::pair<int, int>>{{u, 1}, {v, 1}};
      entries.push_back({p - 1 + i, a, {monomial(1.0, pw)}});
    }
  for (int k = 0; k < m; ++k) entries.push_back({2 * p - 1 + k, qprime + k, {monomial(1.0, {})}});
  return std::make_shared<PolyMatrixMap>(src, tgt, std::move(entries), shape_id("whitney", {p, q, qprime, m}));
}

std::shared_ptr<PolyMatrixMap> block_diagonal_map(int p, int q, const std::vector<std::shared_ptr<PolyMatrixMap>>& sphere_maps,
                                                  const std::vector<int>& columns) {
  if (sphere_maps.empty() || sphere_maps.size() != columns.size())
    throw ConstraintError("block_diagonal_map: need one column choice per sphere map");
  SignatureForm src(p, q);
  const int qprime = static_cast<int>(sphere_maps.size());
  int rows = 0;
  for (std::size_t a = 0; a < sphere_maps.size(); ++a) {
    const auto& phi = sphere_maps[a];
    if (phi->source().p() != p || phi->source().q() != 1 || phi->target().q() != 1)
      throw ConstraintError("block_diagonal_map: sphere maps must be (p,1) -> (m,1) maps");
    if (columns[a] < 0 || columns[a] >= q) throw ConstraintError("block_diagonal_map: column choice out of range");
    const auto rep = verify_boundary_preserving(*phi, sample_boundary(phi->source(), 0x5eedULL + a, 100), 1e-10);
    if (!rep.pass) throw ConstraintError("block_diagonal_map: building block does not map the sphere to the sphere");
    rows += phi->target().p();
  }
  SignatureForm tgt(rows, qprime);
  std::vector<MapEntry> entries;
  int offset = 0;
  for (std::size_t a = 0; a < sphere_maps.size(); ++a) {
    for (const auto& e : sphere_maps[a]->entries()) {
      MapEntry out{offset + e.row, static_cast<int>(a), {}};
      for (const auto& t : e.terms) {
        MapTerm u = t;
        for (auto& pw : u.powers) pw.first = pw.first * q + columns[a];
        for (auto& pw : u.conj_powers) pw.first = pw.first * q + columns[a];
        out.terms.push_back(std::move(u));
      }
      entries.push_back(std::move(out));
    }
    offset += sphere_maps[a]->target().p();
  }
  return std::make_shared<PolyMatrixMap>(src, tgt, std::move(entries), shape_id("blockdiag", {p, q}));
}

std::shared_ptr<PolyMatrixMap> default_block_diagonal_map(int p, int q) {
  std::vector<std::shared_ptr<PolyMatrixMap>> blocks;
  std::vector<int> cols;
  for (int a = 0; a < q; ++a) {
    blocks.push_back(a == 0 ? whitney_map(p, 1, 1, 0) : standard_embedding(p, 1, p, 1));
    cols.push_back(a);
  }
  return block_diagonal_map(p, q, blocks, cols);
}

std::shared_ptr<PolyMatrixMap> conjugate_perturbation(int p, int q, int pprime, int qprime, Complex eps) {
  auto base = standard_embedding(p, q, pprime, qprime);
  auto entries = base->entries();
  for (auto& e : entries)
    if (e.row < p && e.col < q) {
      MapTerm t;
      t.coeff = eps;
      t.conj_powers = {{e.row * q + e.col, 1}};
      e.terms.push_back(t);
    }
  return std::make_shared<PolyMatrixMap>(base->source(), base->target(), std::move(entries), "conjugate-perturbed");
}

// ---------------------------------------------------------------------------
// verification

BoundaryReport verify_boundary_preserving(const CRMap& f, const std::vector<ComplexMatrix>& samples, double tol) {
  BoundaryReport rep;
  rep.samples = samples.size();
  for (double r : kernels::boundary_residuals_parallel(f, samples)) rep.max_residual = std::max(rep.max_residual, r);
  rep.pass = rep.max_residual <= tol;
  return rep;
}

CRReport verify_cr(const CRMap& f, const ChartField& chart, double tol, double immersion_tol) {
  if (!(chart.form() == f.source())) throw DimensionError("verify_cr: chart and map sources differ");
  const CRTangentData cr = cr_tangent_basis(chart);
  const SignatureForm& F = chart.form();
  const MatrixJet A = chart.frame_jet().truncated(1);
  const MatrixJet zj = point_jet_of_frame(F, A);
  const MatrixJet wj = f.evaluate_jet(zj);
  const ComplexMatrix w0 = wj.value();
  const auto sp = A.space();
  const int m = chart.num_vars();

  auto push = [&](const MatrixJet& J, const Eigen::VectorXd& v) {
    ComplexMatrix out = ComplexMatrix::Zero(J.rows(), J.cols());
    for (int i = 0; i < m; ++i) out += v(i) * J.coeffs()[sp->var_index(i)];
    return out;
  };

  const Complex I(0.0, 1.0);
  CRReport rep;
  const auto c = cr.cr_basis.cols();
  const auto& T = f.target();
  Eigen::MatrixXd dw_real(2 * T.p() * T.q(), c);
  for (Eigen::Index k = 0; k < c; ++k) {
    const Eigen::VectorXd v = cr.cr_basis.col(k);
    const Eigen::VectorXd Jv = cr.cr_basis * cr.complex_structure.col(k);
    const ComplexMatrix dz_T = push(zj, v) - I * push(zj, Jv);
    const ComplexMatrix dw_v = push(wj, v);
    const ComplexMatrix dw_Jv = push(wj, Jv);
    const ComplexMatrix dw_T = dw_v - I * dw_Jv;
    const ComplexMatrix dwbar_T = dw_v.conjugate() - I * dw_Jv.conjugate();
    const double scale = max_abs(dz_T);
    rep.contact_residual = std::max(rep.contact_residual, max_abs(w0.adjoint() * dw_T) / scale);
    rep.holomorphic_residual = std::max(rep.holomorphic_residual, max_abs(dwbar_T) / scale);
    for (int r = 0; r < T.p(); ++r)
      for (int s = 0; s < T.q(); ++s) {
        dw_real(2 * (r * T.q() + s), k) = dw_v(r, s).real();
        dw_real(2 * (r * T.q() + s) + 1, k) = dw_v(r, s).imag();
      }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dw_real);
  rep.min_singular_value = svd.singularValues().size() ? svd.singularValues().minCoeff() : 0.0;
  rep.immersion = rep.min_singular_value >= immersion_tol;
  rep.cr_residual = std::max(rep.contact_residual, rep.holomorphic_residual);
  rep.pass = rep.cr_residual <= tol;
  (void)F;
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConstraintError("map JSON: complex numbers are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const ComplexMatrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(complex_to_json(M(i, k)));
    rows.push_back(row);
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConstraintError("map JSON: matrices are arrays of rows");
  ComplexMatrix M(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != j[0].size()) throw ConstraintError("map JSON: ragged matrix");
    for (std::size_t k = 0; k < j[i].size(); ++k) M(i, k) = complex_from_json(j[i][k]);
  }
  return M;
}

json powers_to_json(const std::vector<std::pair<int, int>>& powers, int q) {
  json out = json::object();
  for (const auto& [idx, k] : powers) out[std::to_string(idx / q) + "," + std::to_string(idx % q)] = k;
  return out;
}

std::vector<std::pair<int, int>> powers_from_json(const json& j, int p, int q) {
  if (!j.is_object()) throw ConstraintError("map JSON: powers must be an object of \"i,j\": k");
  std::vector<std::pair<int, int>> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const auto comma = key.find(',');
    if (comma == std::string::npos) throw ConstraintError("map JSON: power key must be \"i,j\"");
    int i = 0, c = 0;
    try {
      i = std::stoi(key.substr(0, comma));
      c = std::stoi(key.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConstraintError("map JSON: power key must be \"i,j\"");
    }
    if (i < 0 || i >= p || c < 0 || c >= q) throw ConstraintError("map JSON: power index outside the source shape");
    if (!it.value().is_number_integer() || it.value().get<int>() < 0)
      throw ConstraintError("map JSON: exponents are non-negative integers");
    out.emplace_back(i * q + c, it.value().get<int>());
  }
  return out;
}

std::pair<int, int> shape_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ConstraintError(std::string("map JSON: ") + what + " must be [p, q]");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

nlohmann::json map_to_json(const PolyMatrixMap& f) {
  json j;
  j["id"] = f.id();
  j["source"] = {f.source().p(), f.source().q()};
  j["target"] = {f.target().p(), f.target().q()};
  json entries = json::array();
  const int q = f.source().q();
  for (const auto& e : f.entries()) {
    json terms = json::array();
    for (const auto& t : e.terms) {
      json tj;
      tj["coeff"] = complex_to_json(t.coeff);
      tj["powers"] = powers_to_json(t.powers, q);
      if (!t.conj_powers.empty()) tj["conj_powers"] = powers_to_json(t.conj_powers, q);
      terms.push_back(tj);
    }
    entries.push_back({{"row", e.row}, {"col", e.col}, {"terms", terms}});
  }
  j["entries"] = entries;
  return j;
}

nlohmann::json map_to_json(const ComposedMap& f) {
  const auto* core = dynamic_cast<const PolyMatrixMap*>(&f.core());
  if (!core) throw ConstraintError("map_to_json: only polynomial cores can be serialized");
  json j = map_to_json(*core);
  j["id"] = f.id();
  if (f.pre()) j["pre_automorphism"] = matrix_to_json(*f.pre());
  if (f.post()) j["post_automorphism"] = matrix_to_json(*f.post());
  return j;
}

std::shared_ptr<CRMap> map_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConstraintError("map JSON: top level must be an object");
  for (const char* key : {"source", "target", "entries"})
    if (!j.contains(key)) throw ConstraintError(std::string("map JSON: missing \"") + key + "\"");
  const auto [p, q] = shape_from_json(j["source"], "source");
  const auto [pp, qq] = shape_from_json(j["target"], "target");
  SignatureForm src(p, q), tgt(pp, qq);
  if (!j["entries"].is_array()) throw ConstraintError("map JSON: entries must be an array");
  std::vector<MapEntry> entries;
  for (const auto& ej : j["entries"]) {
    if (!ej.is_object() || !ej.contains("row") || !ej.contains("col") || !ej.contains("terms"))
      throw ConstraintError("map JSON: entry needs row, col and terms");
    if (!ej["row"].is_number_integer() || !ej["col"].is_number_integer() || !ej["terms"].is_array())
      throw ConstraintError("map JSON: malformed entry");
    MapEntry e{ej["row"].get<int>(), ej["col"].get<int>(), {}};
    for (const auto& tj : ej["terms"]) {
      if (!tj.is_object() || !tj.contains("coeff")) throw ConstraintError("map JSON: term needs coeff");
      MapTerm t;
      t.coeff = complex_from_json(tj["coeff"]);
      if (tj.contains("powers")) t.powers = powers_from_json(tj["powers"], p, q);
      if (tj.contains("conj_powers")) t.conj_powers = powers_from_json(tj["conj_powers"], p, q);
      e.terms.push_back(std::move(t));
    }
    entries.push_back(std::move(e));
  }
  const std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "file";
  auto core = std::make_shared<PolyMatrixMap>(src, tgt, std::move(entries), id);
  const bool has_pre = j.contains("pre_automorphism"), has_post = j.contains("post_automorphism");
  if (!has_pre && !has_post) return core;
  std::optional<ComplexMatrix> pre, post;
  if (has_pre) pre = matrix_from_json(j["pre_automorphism"]);
  if (has_post) post = matrix_from_json(j["post_automorphism"]);
  return std::make_shared<ComposedMap>(core, pre, post);
}

}  // namespace shilov
