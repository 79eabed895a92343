#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "airyline/special_airy.hpp"

namespace airyline::nevanlinna {

using cplx = std::complex<double>;

enum class TailMode { none, airy_tail };
enum class Representation { plain, general, airy_anchored };

// x_1 >= x_2 >= ... >= x_N. With airy_tail the configuration continues with
// a_i + tail_shift for i > N (a_i the Airy zeros).
struct ParticleMeasure {
  std::vector<double> particles;
  TailMode tail = TailMode::none;
  double tail_shift = 0.0;

  // Sorts into non-increasing order.
  static ParticleMeasure from_unsorted(std::vector<double> xs, TailMode tail = TailMode::none);
  // First N Airy zeros shifted by `shift`, continued by the shifted tail.
  static ParticleMeasure airy_configuration(std::size_t N, double shift = 0.0);
  std::size_t size() const noexcept { return particles.size(); }
};

// plain:          b + c w + sum 1/(x - w)
// general:        b + c w + sum [1/(x - w) - x/(1 + x^2)]
// airy_anchored:  sum [1/(x_i - w) - 1/a_i] - Ai'(0)/Ai(0)   (b = c = 0)
struct NevanlinnaFn {
  ParticleMeasure measure;
  double b = 0.0;
  double c = 0.0;
  Representation representation = Representation::plain;
  double pole_tol = 1e-12;
  // tail remainder allowed before evaluate() refuses (airy_tail only)
  double tail_tol = 1e-6;

  static NevanlinnaFn plain(ParticleMeasure m, double b = 0.0, double c = 0.0);
  static NevanlinnaFn general(ParticleMeasure m, double b = 0.0, double c = 0.0);
  static NevanlinnaFn airy_anchored(ParticleMeasure m);
};

// Validates representation/tail combinations and c >= 0.
void validate(const NevanlinnaFn& fn);

cplx evaluate(const NevanlinnaFn& fn, cplx w, double* tail_error = nullptr);
// k-th derivative, 1 <= k <= 4.
cplx derivative(const NevanlinnaFn& fn, cplx w, int k, double* tail_error = nullptr);

struct AiryLikeParams {
  double frak_d = 0.5;
  double c_star = 10.0;
};

// sqrt(w) = a + i b lattice; keeps points with Im w >= c_star sqrt(Re w v 0 + 1)
// and |w| <= cap. Spacing of b is uniform in b^3 (mirrors an eta^3 mesh).
struct GridSpec {
  double cap = 1e4;
  std::size_t n_a = 48;   // real part of sqrt(w) samples
  std::size_t n_b = 48;   // imaginary part of sqrt(w) samples
};

std::vector<cplx> airy_like_grid(const AiryLikeParams& params, const GridSpec& grid);

struct EnvelopeViolation {
  cplx w;
  double deviation;  // |Y - sqrt w|
  double bound;      // C_* Im[sqrt w]^{1-d} / Im w
};

struct AiryLikeReport {
  bool poles_bounded = true;
  double max_pole = 0.0;
  std::vector<EnvelopeViolation> envelope_violations;
  double fitted_constant = 0.0;  // max |Y - sqrt w| Im w / Im[sqrt w]^{1-d} over the grid
  std::size_t grid_points = 0;
  bool pass = true;
};

AiryLikeReport check_airy_like(const NevanlinnaFn& fn, const AiryLikeParams& params,
                               const GridSpec& grid = {});

struct RigidityReport {
  double statistic = 0.0;   // max_i |x_i - a_i| i^{delta/6} / K^4
  std::size_t argmax = 0;   // 1-based
  double raw_max = 0.0;     // max_i |x_i - a_i| i^{delta/6}
};

RigidityReport rigidity_check(const ParticleMeasure& m, double K, double delta,
                              double min_K = 100.0);

// f, f', f'' with compact support [lo, hi].
struct TestFunction {
  std::function<double(double)> f, df, d2f;
  double lo = 0.0, hi = 0.0;
  std::vector<double> breakpoints;  // optional hints for the x-quadrature
};

// chi(y) = 1 on [0, y1], smooth decay to 0 at y2.
struct CutoffFunction {
  std::function<double(double)> chi, dchi;
  double y_flat = 0.5;
  double y_max = 1.0;
};

// Smooth C-infinity step s(t): 0 for t <= 0, 1 for t >= 1, with derivatives.
double smooth_step(double t, int derivative_order = 0);

// 1 on [a, b], decays to 0 over `taper` on each side.
TestFunction smooth_plateau(double a, double b, double taper);
CutoffFunction smooth_cutoff(double y1, double y2);

struct HsOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-10;
  std::size_t max_intervals = 4000;
};

// (2/pi) int_H Re[dbar f~ Y] dx dy with f~ = (f + i y f') chi(y).
double hs_integrate(const NevanlinnaFn& fn, const TestFunction& f, const CutoffFunction& chi,
                    const HsOptions& opt = {}, double* error_estimate = nullptr);

struct CloseRReport {
  double statistic = 0.0;  // max |Y - sqrt w| |w|^{1/2}
  cplx argmax{};
  bool bounded = false;    // statistic <= B
  std::size_t samples = 0;
};

// Samples arg w in (0, 3pi/4), |w| in (max(B, r_min), r_max] (log spaced).
// Throws PreconditionError if fn fails check_airy_like(precondition).
CloseRReport closeR_bound_check(const NevanlinnaFn& fn, double B, double r_min = 10.0,
                                double r_max = 1e4, const AiryLikeParams* precondition = nullptr,
                                std::size_t n_radii = 40, std::size_t n_angles = 24);

}  // namespace airyline::nevanlinna
