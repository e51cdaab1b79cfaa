#include <doctest.h>

#include "shilov/fd_oracle.hpp"
#include "shilov/maurer_cartan.hpp"
#include "shilov/random.hpp"

using namespace shilov;

TEST_CASE("jet connection matches finite differences") {
  const SignatureForm F(3, 2);
  const auto pts = sample_boundary(F, 8, 2);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    ChartOptions o;
    o.gauge_seed = 30 + k;
    const ChartField chart = chart_through(F, pts[k], 3, o);
    const ConnectionMatrix C = connection_from_frame_field(chart);
    const FrameFunction A = frame_function(chart);
    const int m = chart.num_vars();
    const std::vector<double> zero(m, 0.0);
    const auto pi0 = fd_connection(A, zero, 1e-5);
    const auto dpi = fd_connection_derivative(A, m, 1e-4);
    const JetSpacePtr& sp = C.components[0].space();
    double worst0 = 0.0, worst1 = 0.0;
    for (int i = 0; i < m; ++i) {
      worst0 = std::max(worst0, max_abs(C.components[i].value() - pi0[i]));
      for (int j = 0; j < m; ++j)
        worst1 = std::max(worst1, max_abs(C.components[i].coeffs()[sp->var_index(j)] - dpi[i * m + j]));
    }
    CHECK(worst0 < 1e-7);
    CHECK(worst1 < 1e-5);
  }
}
