#include "sao.hpp"

#include <lapacke.h>

#include <cmath>
#include <random>
#include <stdexcept>

namespace oracle {

std::vector<SaoSample> sao_top_two(const SaoOptions& opt, std::size_t draws) {
  const auto n = static_cast<lapack_int>(std::llround(opt.L / opt.h)) - 1;  // interior nodes
  const double h = opt.h, inv_h2 = 1.0 / (h * h);
  const double noise = 2.0 / std::sqrt(opt.beta) / std::sqrt(h);
  std::mt19937_64 gen(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> d(n), e(n), w(n), z(1);
  std::vector<lapack_int> isuppz(4);
  std::vector<SaoSample> out;
  out.reserve(draws);
  for (std::size_t k = 0; k < draws; ++k) {
    for (lapack_int i = 0; i < n; ++i) {
      d[i] = 2.0 * inv_h2 + h * double(i + 1) + noise * normal(gen);
      e[i] = -inv_h2;
    }
    lapack_int m = 0;
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'I', n, d.data(), e.data(), 0.0,
                                           0.0, 1, 2, 0.0, &m, w.data(), z.data(), 1, isuppz.data());
    if (info != 0 || m != 2) throw std::runtime_error("sao: dstevr failed");
    out.push_back({-w[0], -w[1]});
  }
  return out;
}

}  // namespace oracle
