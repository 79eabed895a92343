#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace airyline::airy {

using cplx = std::complex<double>;

enum class AiryMethod { series, taylor, asymptotic };

const char* to_string(AiryMethod m) noexcept;

struct AiryValue {
  cplx value;
  cplx derivative;
  AiryMethod method;
};

// Ai(w) = value * exp(exponent), Ai'(w) = derivative * exp(exponent).
struct ScaledAiryValue {
  cplx value;
  cplx derivative;
  cplx exponent;
  AiryMethod method;

  double log_abs() const;  // log|Ai(w)|
  double phase() const;    // arg Ai(w)
};

// Regime boundaries (|w|).
inline constexpr double kSeriesRadius = 1.5;
inline constexpr double kAsymptoticRadius = 12.0;

inline constexpr double kAi0 = 0.35502805388781723926;
inline constexpr double kAip0 = -0.25881940379280679841;
// -Ai'(0)/Ai(0)
inline constexpr double kLogDerivAt0 = 0.72901113294722698142;

// Throws AiryRangeError when exp(-2/3 w^{3/2}) leaves the double range.
AiryValue airy_eval(cplx w);
ScaledAiryValue airy_eval_scaled(cplx w);

// -Ai'(w)/Ai(w). Throws PoleProximityError (index of nearest zero) when w is
// within `pole_tol` of a zero of Ai.
cplx airy_log_derivative(cplx w, double pole_tol = 1e-8);

// Asymptotic location -(3 pi (4i-1)/8)^{2/3} with the first two corrections.
double zero_asymptotic_guess(std::size_t i);
// Continuous leading-order profile g(s) = -(3 pi (4s-1)/8)^{2/3}.
double zero_profile(double s);
// i-th zero (1-based), safeguarded Newton with bisection fallback.
double airy_zero(std::size_t i);

struct ZeroEnvelope {
  double constant;       // max_i |a_i + (3 pi i/2)^{2/3}| i^{1/3}
  std::size_t argmax;    // 1-based
};

class AiryZeroTable {
 public:
  AiryZeroTable() = default;
  explicit AiryZeroTable(std::vector<double> zeros) : zeros_(std::move(zeros)) {}

  std::size_t count() const noexcept { return zeros_.size(); }
  const std::vector<double>& zeros() const noexcept { return zeros_; }
  // 1-based access to match a_1 > a_2 > ...
  double operator[](std::size_t i) const { return zeros_.at(i - 1); }
  ZeroEnvelope envelope() const;

 private:
  std::vector<double> zeros_;
};

AiryZeroTable airy_zeros(std::size_t count);
// Process-wide cache; grows on demand, returned table is immutable.
std::shared_ptr<const AiryZeroTable> shared_zero_table(std::size_t min_count);

// Tail of the anchored Airy sum beyond the first N zeros, k-th w-derivative:
//   k = 0: sum_{i>N} [1/(a_i - w) - 1/a_i]
//   k >= 1: sum_{i>N} k!/(a_i - w)^{k+1}
// via the integral against sqrt(-x)/pi from s = N + 1/2 plus an
// Euler-Maclaurin term. `error_estimate` receives the next-order remainder.
// tail_order: 0 = no correction, 1 = integral only, 2 = integral + EM term.
cplx airy_tail_sum(cplx w, std::size_t N, int k, int tail_order, double* error_estimate = nullptr);

// Sum_{i<=N}[1/(a_i-w) - 1/a_i] - Ai'(0)/Ai(0) + tail correction.
// Throws InsufficientTableError when the tail estimate exceeds `tail_tol`
// and PoleProximityError near a tabulated zero.
cplx weierstrass_sum(cplx w, const AiryZeroTable& zeros, int tail_order = 2,
                     double tail_tol = 1e-8, double* error_estimate = nullptr);

}  // namespace airyline::airy
