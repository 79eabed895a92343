#pragma once

#include <complex>
#include <string>
#include <vector>

namespace airyline {

// Polynomial V(x) = sum_k coeffs[k] x^k, degree <= 6.
class PotentialSpec {
 public:
  PotentialSpec();  // x^2/2
  explicit PotentialSpec(std::vector<double> coeffs, double work_lo = -3.0, double work_hi = 3.0);

  static PotentialSpec gaussian();            // x^2/2
  static PotentialSpec quartic(double t);     // x^2/2 + t x^4
  static PotentialSpec zero();                // V = 0 (dynamics only)

  double V(double x) const;
  double dV(double x) const;
  double d2V(double x) const;
  std::complex<double> dV(std::complex<double> z) const;

  const std::vector<double>& coeffs() const noexcept { return c_; }
  int degree() const noexcept;
  bool is_gaussian() const noexcept;
  double work_lo() const noexcept { return lo_; }
  double work_hi() const noexcept { return hi_; }

  // Supported one-cut class: degree <= 6, even degree, positive leading
  // coefficient, V'' >= c > 0 on the working interval. Throws ConfigError.
  void validate() const;

 private:
  std::vector<double> c_;
  double lo_ = -3.0, hi_ = 3.0;
};

enum class ProcessKind { dbm, laguerre, jacobi };
// matrix: pairwise numerator l_i(1-l_j) + l_j(1-l_i) (stationary for the
// Jacobi ensemble). as_displayed: l_i(1-l_i) + l_j(1-l_j).
enum class JacobiPairing { matrix, as_displayed };

const char* to_string(ProcessKind k) noexcept;

struct ProcessSpec {
  ProcessKind kind = ProcessKind::dbm;
  int n = 1;
  double beta = 2.0;
  PotentialSpec V;       // dbm
  int m = 0;             // laguerre, jacobi
  int p = 0, q = 0;      // jacobi
  bool stationary = true;  // laguerre: include the -lambda term
  JacobiPairing pairing = JacobiPairing::matrix;

  static ProcessSpec gaussian(int n, double beta);
  static ProcessSpec dbm(int n, PotentialSpec V, double beta);
  static ProcessSpec laguerre(int n, int m, double beta, bool stationary = true);
  static ProcessSpec jacobi(int n, int p, int q, double beta);

  bool is_gaussian() const noexcept { return kind == ProcessKind::dbm && V.is_gaussian(); }
  // Throws ConfigError naming the violated constraint (e.g. "p+q=m").
  void validate() const;
};

}  // namespace airyline
