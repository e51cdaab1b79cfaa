#pragma once

// Central-difference evaluation of connection forms from a dense frame
// function. Independent of the jet engine; used as a test oracle.

#include <functional>
#include <span>
#include <vector>

#include "shilov/geometry.hpp"

namespace shilov {

using FrameFunction = std::function<ComplexMatrix(std::span<const double>)>;

/// pi_i(t) = (dA/dt_i)(t) A(t)^{-1}, one matrix per direction.
std::vector<ComplexMatrix> fd_connection(const FrameFunction& A, std::span<const double> t, double step);

/// d pi_i / dt_j at t = 0, stored at index i * m + j. Nested central differences.
std::vector<ComplexMatrix> fd_connection_derivative(const FrameFunction& A, int num_vars, double step);

/// (d pi)_{ij} = d_i pi_j - d_j pi_i for i < j, in pair order.
std::vector<ComplexMatrix> fd_exterior_derivative(const FrameFunction& A, int num_vars, double step);

FrameFunction frame_function(const ChartField& chart);

}  // namespace shilov
