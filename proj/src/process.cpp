#include "airyline/process.hpp"

#include <cmath>
#include <sstream>

#include "airyline/errors.hpp"

namespace airyline {

PotentialSpec::PotentialSpec() : c_{0.0, 0.0, 0.5} {}

PotentialSpec::PotentialSpec(std::vector<double> coeffs, double work_lo, double work_hi)
    : c_(std::move(coeffs)), lo_(work_lo), hi_(work_hi) {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  if (c_.empty()) c_.push_back(0.0);
  if (c_.size() > 7) throw ConfigError("potential", "degree must be <= 6");
}

PotentialSpec PotentialSpec::gaussian() { return PotentialSpec(); }
PotentialSpec PotentialSpec::quartic(double t) { return PotentialSpec({0.0, 0.0, 0.5, 0.0, t}); }
PotentialSpec PotentialSpec::zero() { return PotentialSpec(std::vector<double>{0.0}); }

int PotentialSpec::degree() const noexcept { return int(c_.size()) - 1; }

bool PotentialSpec::is_gaussian() const noexcept {
  return c_.size() == 3 && c_[0] == 0.0 && c_[1] == 0.0 && c_[2] == 0.5;
}

double PotentialSpec::V(double x) const {
  double s = 0.0;
  for (std::size_t k = c_.size(); k-- > 0;) s = s * x + c_[k];
  return s;
}

double PotentialSpec::dV(double x) const {
  double s = 0.0;
  for (std::size_t k = c_.size(); k-- > 1;) s = s * x + double(k) * c_[k];
  return s;
}

double PotentialSpec::d2V(double x) const {
  double s = 0.0;
  for (std::size_t k = c_.size(); k-- > 2;) s = s * x + double(k * (k - 1)) * c_[k];
  return s;
}

std::complex<double> PotentialSpec::dV(std::complex<double> z) const {
  std::complex<double> s = 0.0;
  for (std::size_t k = c_.size(); k-- > 1;) s = s * z + double(k) * c_[k];
  return s;
}

void PotentialSpec::validate() const {
  const int d = degree();
  if (d < 2 || d % 2 != 0) throw ConfigError("potential", "degree must be even and >= 2");
  if (!(c_.back() > 0.0)) throw ConfigError("potential", "leading coefficient must be positive");
  if (!(hi_ > lo_)) throw ConfigError("potential", "empty working interval");
  double vmin = 1e300;
  for (int i = 0; i <= 2000; ++i) vmin = std::min(vmin, d2V(lo_ + (hi_ - lo_) * i / 2000.0));
  if (!(vmin > 0.0)) {
    std::ostringstream os;
    os << "V'' must be bounded below by a positive constant on [" << lo_ << ", " << hi_
       << "] (min " << vmin << ")";
    throw ConfigError("potential", os.str());
  }
}

const char* to_string(ProcessKind k) noexcept {
  switch (k) {
    case ProcessKind::dbm: return "dbm";
    case ProcessKind::laguerre: return "laguerre";
    case ProcessKind::jacobi: return "jacobi";
  }
  return "?";
}

ProcessSpec ProcessSpec::gaussian(int n, double beta) {
  ProcessSpec s;
  s.kind = ProcessKind::dbm;
  s.n = n;
  s.beta = beta;
  s.V = PotentialSpec::gaussian();
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::dbm(int n, PotentialSpec V, double beta) {
  ProcessSpec s;
  s.kind = ProcessKind::dbm;
  s.n = n;
  s.beta = beta;
  s.V = std::move(V);
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::laguerre(int n, int m, double beta, bool stationary) {
  ProcessSpec s;
  s.kind = ProcessKind::laguerre;
  s.n = n;
  s.m = m;
  s.beta = beta;
  s.stationary = stationary;
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::jacobi(int n, int p, int q, double beta) {
  ProcessSpec s;
  s.kind = ProcessKind::jacobi;
  s.n = n;
  s.p = p;
  s.q = q;
  s.m = p + q;
  s.beta = beta;
  s.validate();
  return s;
}

void ProcessSpec::validate() const {
  if (n < 1) throw ConfigError("n", "must be >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta", "must be > 0");
  switch (kind) {
    case ProcessKind::dbm:
      V.validate();
      break;
    case ProcessKind::laguerre:
      if (m < n) throw ConfigError("m", "constraint m>=n violated");
      break;
    case ProcessKind::jacobi:
      if (p + q != m) throw ConfigError("p", "constraint p+q=m violated");
      if (p < n + 1) throw ConfigError("p", "constraint p>=n+1 violated");
      if (q < n + 1) throw ConfigError("q", "constraint q>=n+1 violated");
      break;
  }
}

}  // namespace airyline
