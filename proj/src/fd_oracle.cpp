#include "shilov/fd_oracle.hpp"

#include "shilov/errors.hpp"

namespace shilov {

std::vector<ComplexMatrix> fd_connection(const FrameFunction& A, std::span<const double> t, double step) {
  const int m = static_cast<int>(t.size());
  std::vector<double> x(t.begin(), t.end());
  const ComplexMatrix Ainv = A(x).inverse();
  std::vector<ComplexMatrix> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) {
    x[i] = t[i] + step;
    const ComplexMatrix plus = A(x);
    x[i] = t[i] - step;
    const ComplexMatrix minus = A(x);
    x[i] = t[i];
    out.push_back((plus - minus) / (2.0 * step) * Ainv);
  }
  return out;
}

std::vector<ComplexMatrix> fd_connection_derivative(const FrameFunction& A, int num_vars, double step) {
  if (num_vars < 1) throw DimensionError("fd_connection_derivative: need at least one variable");
  const int m = num_vars;
  std::vector<ComplexMatrix> out(static_cast<std::size_t>(m) * m);
  std::vector<double> t(m, 0.0);
  for (int j = 0; j < m; ++j) {
    t[j] = step;
    const auto plus = fd_connection(A, t, step);
    t[j] = -step;
    const auto minus = fd_connection(A, t, step);
    t[j] = 0.0;
    for (int i = 0; i < m; ++i) out[i * m + j] = (plus[i] - minus[i]) / (2.0 * step);
  }
  return out;
}

std::vector<ComplexMatrix> fd_exterior_derivative(const FrameFunction& A, int num_vars, double step) {
  const auto D = fd_connection_derivative(A, num_vars, step);
  const int m = num_vars;
  std::vector<ComplexMatrix> out;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) out.push_back(D[j * m + i] - D[i * m + j]);
  return out;
}

FrameFunction frame_function(const ChartField& chart) {
  return [&chart](std::span<const double> t) { return chart.frame_at(t); };
}

}  // namespace shilov
