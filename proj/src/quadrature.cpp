#include "airyline/quadrature.hpp"

#include <algorithm>
#include <queue>

namespace airyline::quad {

namespace {

// QUADPACK ordering: xgk[7] = 0, Gauss nodes are xgk[1], xgk[3], xgk[5], xgk[7].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Piece {
  double a, b;
  T value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <class T, class F>
Piece<T> gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T fc = f(c);
  T k = fc * kWgk[7];
  T g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    T s = f(c - dx) + f(c + dx);
    k += s * kWgk[j];
    if (j % 2 == 1) g += s * kWg[j / 2];
  }
  k *= h;
  g *= h;
  return {a, b, k, std::abs(k - g)};
}

template <class T, class F>
void run(const F& f, const std::vector<double>& cuts, double abs_tol, double rel_tol,
         std::size_t max_intervals, T& value, double& error, bool& converged,
         std::size_t& evals) {
  std::priority_queue<Piece<T>> heap;
  value = T{};
  error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    auto p = gk15<T>(f, cuts[i], cuts[i + 1]);
    evals += 15;
    value += p.value;
    error += p.error;
    heap.push(p);
  }
  converged = true;
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (heap.size() >= max_intervals) {
      converged = false;
      break;
    }
    Piece<T> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      converged = false;
      heap.push(worst);
      break;
    }
    auto l = gk15<T>(f, worst.a, mid);
    auto r = gk15<T>(f, mid, worst.b);
    evals += 30;
    value += l.value + r.value - worst.value;
    error += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
  }
  // Recompute sums to shed accumulated cancellation.
  value = T{};
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
}

std::vector<double> partition(double a, double b, const std::vector<double>& bps) {
  std::vector<double> cuts{a};
  std::vector<double> inner;
  for (double x : bps)
    if (x > a && x < b) inner.push_back(x);
  std::sort(inner.begin(), inner.end());
  cuts.insert(cuts.end(), inner.begin(), inner.end());
  cuts.push_back(b);
  return cuts;
}

}  // namespace

const std::array<double, 8>& GK15::nodes() { return kXgk; }
const std::array<double, 8>& GK15::kronrod_weights() { return kWgk; }
const std::array<double, 4>& GK15::gauss_weights() { return kWg; }

Result integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol, std::size_t max_intervals,
                 const std::vector<double>& breakpoints) {
  Result r;
  run<double>(f, partition(a, b, breakpoints), abs_tol, rel_tol, max_intervals, r.value, r.error,
              r.converged, r.evaluations);
  return r;
}

ComplexResult integrate_complex(const std::function<std::complex<double>(double)>& f, double a,
                                double b, double abs_tol, double rel_tol,
                                std::size_t max_intervals) {
  ComplexResult r;
  run<std::complex<double>>(f, partition(a, b, {}), abs_tol, rel_tol, max_intervals, r.value,
                            r.error, r.converged, r.evaluations);
  return r;
}

ChebyshevGauss::ChebyshevGauss(std::size_t n) : cos_theta(n), weight(M_PI / double(n)) {
  for (std::size_t k = 0; k < n; ++k)
    cos_theta[k] = std::cos((2.0 * double(k) + 1.0) * M_PI / (2.0 * double(n)));
}

}  // namespace airyline::quad
