#include "shilov/kernels.hpp"

#include <algorithm>

#include "shilov/cr_maps.hpp"
#include "shilov/errors.hpp"

namespace shilov::kernels {

namespace {

void check_product_operands(const MatrixJet& a, const MatrixJet& b) {
  if (a.cols() != b.rows()) throw DimensionError("MatrixJet product: shape mismatch");
  if (a.num_vars() != b.num_vars()) throw DimensionError("MatrixJet product: variable count mismatch");
  if (a.order() != b.order()) throw JetOrderError("MatrixJet product: truncation order mismatch");
}

}  // namespace

MatrixJet matrix_jet_product_serial(const MatrixJet& a, const MatrixJet& b) {
  check_product_operands(a, b);
  MatrixJet out(a.space(), a.rows(), b.cols());
  auto& c = out.coeffs();
  for (const auto& e : a.space()->mul_table()) c[e.out].noalias() += a.coeffs()[e.a] * b.coeffs()[e.b];
  return out;
}

MatrixJet matrix_jet_product_parallel(const MatrixJet& a, const MatrixJet& b) {
  check_product_operands(a, b);
  MatrixJet out(a.space(), a.rows(), b.cols());
  auto& c = out.coeffs();
  const auto& table = a.space()->mul_table();
  const auto& offsets = a.space()->mul_offsets();
  const long n = static_cast<long>(c.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long o = 0; o < n; ++o)
    for (std::uint32_t k = offsets[o]; k < offsets[o + 1]; ++k)
      c[o].noalias() += a.coeffs()[table[k].a] * b.coeffs()[table[k].b];
  return out;
}

MatrixJet matrix_jet_product(const MatrixJet& a, const MatrixJet& b) {
  // Small jets are cheaper without a parallel region.
  if (a.space()->mul_table().size() < 256) return matrix_jet_product_serial(a, b);
  return matrix_jet_product_parallel(a, b);
}

std::vector<double> boundary_residuals_serial(const CRMap& f, const std::vector<ComplexMatrix>& samples) {
  std::vector<double> out(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const ComplexMatrix w = f.evaluate(samples[s]);
    out[s] = max_abs(ComplexMatrix::Identity(w.cols(), w.cols()) - w.adjoint() * w);
  }
  return out;
}

std::vector<double> boundary_residuals_parallel(const CRMap& f, const std::vector<ComplexMatrix>& samples) {
  std::vector<double> out(samples.size());
  const long n = static_cast<long>(samples.size());
#pragma omp parallel for schedule(static)
  for (long s = 0; s < n; ++s) {
    const ComplexMatrix w = f.evaluate(samples[s]);
    out[s] = max_abs(ComplexMatrix::Identity(w.cols(), w.cols()) - w.adjoint() * w);
  }
  return out;
}

double structure_residual_serial(const std::vector<MatrixJet>& pi) {
  if (pi.empty()) return 0.0;
  const int m = static_cast<int>(pi.size());
  const auto N = pi[0].rows();
  const auto space = pi[0].space();
  if (space->order() < 1) throw JetOrderError("structure residual: connection jets need order >= 1");

  // Scalar 1-forms pi[L][G] = sum_i pi_i[L][G] dt_i.
  std::vector<ExteriorForm> forms;
  forms.reserve(N * N);
  for (Eigen::Index L = 0; L < N; ++L)
    for (Eigen::Index G = 0; G < N; ++G) {
      ExteriorForm f(1, space);
      for (int i = 0; i < m; ++i) f.component(i) = pi[i].entry(L, G);
      forms.push_back(std::move(f));
    }

  double worst = 0.0;
  const int lower = space->order() - 1;
  for (Eigen::Index L = 0; L < N; ++L)
    for (Eigen::Index G = 0; G < N; ++G) {
      ExteriorForm lhs = exterior_d(forms[L * N + G]);
      ExteriorForm rhs(2, JetSpace::get(m, lower));
      for (Eigen::Index W = 0; W < N; ++W)
        rhs += wedge(forms[L * N + W], forms[W * N + G]).truncated(lower);
      worst = std::max(worst, (lhs - rhs).max_abs());
    }
  return worst;
}

double structure_residual_parallel(const std::vector<MatrixJet>& pi) {
  if (pi.empty()) return 0.0;
  const int m = static_cast<int>(pi.size());
  if (pi[0].order() < 1) throw JetOrderError("structure residual: connection jets need order >= 1");
  const int lower = pi[0].order() - 1;

  std::vector<MatrixJet> low;
  std::vector<MatrixJet> deriv;  // deriv[i*m + j] = d_i pi_j
  low.reserve(m);
  deriv.reserve(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) low.push_back(pi[i].truncated(lower));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) deriv.push_back(pi[j].derivative(i));

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) pairs.emplace_back(i, j);

  double worst = 0.0;
  const long np = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(dynamic) reduction(max : worst)
  for (long k = 0; k < np; ++k) {
    const auto [i, j] = pairs[k];
    MatrixJet r = deriv[i * m + j] - deriv[j * m + i];
    r -= matrix_jet_product_serial(low[i], low[j]);
    r += matrix_jet_product_serial(low[j], low[i]);
    worst = std::max(worst, r.max_abs());
  }
  return worst;
}

}  // namespace shilov::kernels
