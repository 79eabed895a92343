#pragma once

#include <cstdint>
#include <vector>

// Finite-difference stochastic Airy operator
//   H = -d^2/dx^2 + x + (2/sqrt(beta)) b'(x)   on [0, L], Dirichlet at both ends,
// with white noise discretized as g_i / sqrt(h). Its lowest eigenvalues L_1 < L_2
// give the largest edge-rescaled particles: x_1 = -L_1, x_2 = -L_2.
// Independent of the library: std::mt19937_64 + LAPACKE dstevr.
namespace oracle {

struct SaoSample {
  double x1, x2;
};

struct SaoOptions {
  double beta = 2.0;
  double L = 40.0;
  double h = 0.02;
  std::uint64_t seed = 20240601;
};

std::vector<SaoSample> sao_top_two(const SaoOptions& opt, std::size_t draws);

}  // namespace oracle
