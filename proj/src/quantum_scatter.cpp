#include "hdlab/quantum_scatter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "hdlab/errors.hpp"
#include "hdlab/model_core.hpp"

namespace hdlab {

namespace {

constexpr double kEuler = 0.57721566490153286060651209;
constexpr double kSeriesLimit = 2.0;
constexpr double kRescale = 1e250;

void check_arg(double x) {
  if (!(x >= kBesselMinArg && x <= kBesselMaxArg)) {
    throw ContractViolation("bessel: argument " + std::to_string(x) + " outside [1e-6, 500]");
  }
}

void check_order(int m, int limit) {
  if (m < 0 || m > limit) {
    throw ContractViolation("bessel: order " + std::to_string(m) + " outside [0, " + std::to_string(limit) + "]");
  }
}

// Ascending series; relative accuracy is kept even when the value is tiny.
double j_series(int m, double x) {
  const double h = 0.5 * x;
  const double q = h * h;
  double term = std::exp(m * std::log(h) - std::lgamma(m + 1.0));
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * (m + k));
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Y_0 and Y_1 from the logarithmic small-argument series.
void y01_series(double x, double j0, double j1, double& y0, double& y1) {
  const double h = 0.5 * x;
  const double q = h * h;
  const double lg = std::log(h);
  double harmonic = 0.0;  // H_k
  double s0 = 0.0, s1 = 0.0;
  double t0 = 1.0;  // (-q)^k / (k!)^2
  double t1 = h;    // h (-q)^k / (k! (k+1)!)
  for (int k = 0; k < 200; ++k) {
    const double psi1 = harmonic - kEuler;              // psi(k+1)
    const double psi2 = harmonic + 1.0 / (k + 1) - kEuler;  // psi(k+2)
    const double a0 = 2.0 * psi1 * t0;
    const double a1 = (psi1 + psi2) * t1;
    s0 += a0;
    s1 += a1;
    if (k > 2 && std::abs(a0) <= 1e-18 * std::abs(s0) && std::abs(a1) <= 1e-18 * std::abs(s1)) break;
    harmonic += 1.0 / (k + 1);
    t0 *= -q / ((k + 1.0) * (k + 1.0));
    t1 *= -q / ((k + 1.0) * (k + 2.0));
  }
  y0 = (2.0 / units::pi) * lg * j0 - s0 / units::pi;
  y1 = -1.0 / (units::pi * h) + (2.0 / units::pi) * lg * j1 - s1 / units::pi;
}

// Normalised backward recurrence; returns J_0..J_top with top well above both m_max and x.
std::vector<double> j_miller(int m_max, double x) {
  const double span = std::max(static_cast<double>(m_max), x);
  int top = static_cast<int>(span + 40.0 + 15.0 * std::cbrt(span));
  top += top % 2;
  std::vector<double> j(top + 2, 0.0);
  j[top] = 1e-30;
  double norm_sum = 0.0;
  for (int k = top; k >= 1; --k) {
    j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1];
    if (std::abs(j[k - 1]) > kRescale) {
      for (int i = k - 1; i <= top; ++i) j[i] /= kRescale;
      norm_sum /= kRescale;
    }
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm_sum += 2.0 * j[k - 1];
  }
  norm_sum += j[0];
  for (double& v : j) v /= norm_sum;
  j.pop_back();
  return j;
}

void y01_neumann(double x, const std::vector<double>& j, double& y0, double& y1) {
  const double lg = std::log(0.5 * x) + kEuler;
  double s0 = 0.0;
  for (std::size_t k = 1; 2 * k < j.size(); ++k) {
    s0 += (k % 2 == 0 ? 1.0 : -1.0) * j[2 * k] / static_cast<double>(k);
  }
  double s1 = 0.0;
  for (std::size_t k = 1; 2 * k + 1 < j.size(); ++k) {
    const double kk = static_cast<double>(k);
    s1 += (k % 2 == 1 ? 1.0 : -1.0) * (2.0 * kk + 1.0) / (kk * (kk + 1.0)) * j[2 * k + 1];
  }
  y0 = (2.0 / units::pi) * (lg * j[0] - 2.0 * s0);
  y1 = (2.0 / units::pi) * ((lg - 1.0) * j[1] - j[0] / x + s1);
}

void y_forward(double x, std::vector<double>& y) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m + 1 < y.size(); ++m) {
    if (!std::isfinite(y[m])) {
      y[m + 1] = neg_inf;
      continue;
    }
    y[m + 1] = (2.0 * static_cast<double>(m) / x) * y[m] - y[m - 1];
    if (!std::isfinite(y[m + 1])) y[m + 1] = neg_inf;
  }
}

double continuous_delta(int m, double x, double j, double y) {
  const double theta = std::atan2(y, j);
  const double md = static_cast<double>(m);
  const double approx =
      md < x ? std::sqrt(x * x - md * md) - md * std::acos(md / x) - 0.25 * units::pi : -0.5 * units::pi;
  const double turns = std::round((approx - theta) / (2.0 * units::pi));
  return -0.5 * units::pi - (theta + 2.0 * units::pi * turns);
}

}  // namespace

BesselSequence bessel_sequence(int m_max, double x) {
  check_order(m_max, kSequenceMaxOrder);
  check_arg(x);
  BesselSequence s;
  s.x = x;
  s.Y.assign(std::max(m_max, 1) + 1, 0.0);
  if (x <= kSeriesLimit) {
    s.J.resize(std::max(m_max, 1) + 1);
    for (std::size_t m = 0; m < s.J.size(); ++m) s.J[m] = j_series(static_cast<int>(m), x);
    y01_series(x, s.J[0], s.J[1], s.Y[0], s.Y[1]);
  } else {
    std::vector<double> j = j_miller(std::max(m_max, 1), x);
    y01_neumann(x, j, s.Y[0], s.Y[1]);
    j.resize(std::max(m_max, 1) + 1);
    s.J = std::move(j);
  }
  y_forward(x, s.Y);
  s.J.resize(m_max + 1);
  s.Y.resize(m_max + 1);
  return s;
}

double bessel_J(int m, double x) {
  check_order(m, kBesselMaxOrder);
  check_arg(x);
  if (x <= kSeriesLimit) return j_series(m, x);
  return j_miller(m, x)[m];
}

double bessel_Y(int m, double x) {
  check_order(m, kBesselMaxOrder);
  return bessel_sequence(m, x).Y[m];
}

double phase_shift(int m, double ka) {
  check_order(m, kBesselMaxOrder);
  const BesselSequence s = bessel_sequence(m, ka);
  if (s.Y[m] == 0.0) return 0.5 * units::pi;
  return std::atan(s.J[m] / s.Y[m]);
}

void PhaseShiftTable::write_csv(std::ostream& out) const {
  out << "m,ka,delta_m\n";
  char buf[128];
  for (std::size_t m = 0; m < delta.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", m, ka, delta[m]);
    out << buf;
  }
}

PhaseShiftTable make_phase_shift_table(double ka, int m_max) {
  const BesselSequence s = bessel_sequence(m_max, ka);
  PhaseShiftTable t;
  t.ka = ka;
  t.m_max = m_max;
  t.delta.resize(m_max + 1);
  t.delta_continuous.resize(m_max + 1);
  for (int m = 0; m <= m_max; ++m) {
    t.delta[m] = s.Y[m] == 0.0 ? 0.5 * units::pi : std::atan(s.J[m] / s.Y[m]);
    t.delta_continuous[m] = continuous_delta(m, ka, s.J[m], s.Y[m]);
  }
  return t;
}

int converged_order(double ka) { return static_cast<int>(std::ceil(ka + 10.0 * std::cbrt(ka) + 10.0)); }

CrossSectionReport total_cross_section(const PhaseShiftTable& table, double k) {
  if (!(k > 0.0)) throw ContractViolation("total_cross_section: k must be positive");
  CrossSectionReport r;
  r.ka = table.ka;
  r.k = k;
  const int m_conv = converged_order(table.ka);
  double tail = 0.0;
  r.partial.resize(table.delta.size());
  for (std::size_t m = 0; m < table.delta.size(); ++m) {
    const double s = std::sin(table.delta[m]);
    r.partial[m] = (m == 0 ? 1.0 : 2.0) * (4.0 / k) * s * s;
    r.sigma_total += r.partial[m];
    if (static_cast<int>(m) > m_conv) tail += r.partial[m];
  }
  r.tail_fraction = r.sigma_total > 0.0 ? tail / r.sigma_total : 0.0;
  r.converged = table.m_max >= m_conv && r.tail_fraction <= kTailTolerance;
  return r;
}

DeflectionCheck semiclassical_deflection_check(const PhaseShiftTable& table, double k, double b) {
  if (!(k > 0.0)) throw ContractViolation("deflection check: k must be positive");
  const double a = table.ka / k;
  const double ab = std::abs(b);
  if (ab >= a) throw ContractViolation("deflection check: |b| must be below a");
  DeflectionCheck c;
  c.m = static_cast<int>(std::lround(k * ab));
  if (c.m + 1 > table.m_max) throw ContractViolation("deflection check: m out of table range");
  const auto& d = table.delta_continuous;
  // delta is even in m, so the centred difference at m = 0 becomes a one-sided one.
  c.quantum = c.m == 0 ? 2.0 * std::abs(d[1] - d[0]) : std::abs(d[c.m + 1] - d[c.m - 1]);
  c.classical = units::pi - 2.0 * std::asin(ab / a);
  c.relative_error = std::abs(c.quantum - c.classical) / c.classical;
  return c;
}

}  // namespace hdlab
