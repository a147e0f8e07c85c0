#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cascade/arch.hh"
#include "cascade/dfg.hh"

namespace cascade {

/// 8x8 array: IO rows 0 and 7, MEM columns 3 and 7, PE elsewhere.
ArchSpec default_arch();
/// PE core 0.7 ns and PE hop 0.14 ns; the remaining classes are local choices.
DelayLibrary default_delays(const ArchSpec &spec);
/// Architecture file text (arch and delays) for the two above.
std::string default_arch_file();

/// Separable 3x3 Gaussian-like stencil over lines of `line` pixels.
AppGraph conv_app(int line = 8);
/// Biased, clamped ReLU over `lanes` pixels sharing one bias input.
AppGraph relu_app(int lanes = 6);
/// Horizontal blur followed by a sharpening stage.
AppGraph unsharp_app();

AppGraph vec_add_app(int lanes = 4);
AppGraph mat_mul_app(int lanes = 4);
/// Tensor-times-vector with three-term dot products, unrolled twice.
AppGraph ttv_app();

std::vector<std::pair<std::string, AppGraph>> dense_benchmarks();
std::vector<std::pair<std::string, AppGraph>> sparse_benchmarks();

} // namespace cascade
