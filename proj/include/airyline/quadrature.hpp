#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace airyline::quad {

// 15-point Gauss-Kronrod rule with embedded 7-point Gauss rule on [-1,1].
struct GK15 {
  static const std::array<double, 8>& nodes();          // x_0 = 0 ... descending
  static const std::array<double, 8>& kronrod_weights();
  static const std::array<double, 4>& gauss_weights();  // for nodes 0,2,4,6 (shifted)
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

struct ComplexResult {
  std::complex<double> value{};
  double error = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

// Globally adaptive GK15 (bisect the worst interval until the summed error
// estimate is below max(abs_tol, rel_tol*|I|)). `breakpoints` seed the
// initial partition.
Result integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol, std::size_t max_intervals = 2000,
                 const std::vector<double>& breakpoints = {});

ComplexResult integrate_complex(const std::function<std::complex<double>(double)>& f, double a,
                                double b, double abs_tol, double rel_tol,
                                std::size_t max_intervals = 2000);

// Chebyshev-Gauss (first kind) rule on [A,B] for weight 1/sqrt((x-A)(B-x)):
// int_A^B g(x) dx / sqrt((x-A)(B-x)) ~= (pi/N) sum g(x_k).
struct ChebyshevGauss {
  explicit ChebyshevGauss(std::size_t n);
  std::vector<double> cos_theta;  // cos((2k-1) pi/(2N))
  double weight;                  // pi/N
};

}  // namespace airyline::quad
