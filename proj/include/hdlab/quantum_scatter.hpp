#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

namespace hdlab {

/// Domain of the scalar Bessel functions.
inline constexpr int kBesselMaxOrder = 200;
inline constexpr double kBesselMinArg = 1e-6;
inline constexpr double kBesselMaxArg = 500.0;

/// Orders accepted by bessel_sequence (phase-shift tables need m beyond ka).
inline constexpr int kSequenceMaxOrder = 2000;

double bessel_J(int m, double x);
double bessel_Y(int m, double x);

/// J_m(x) and Y_m(x) for m = 0..m_max. Y overflows to -inf deep in the
/// forbidden region.
struct BesselSequence {
  double x = 0.0;
  std::vector<double> J;
  std::vector<double> Y;
};

BesselSequence bessel_sequence(int m_max, double x);

/// arctan(J_m / Y_m) in (-pi/2, pi/2]; Y = 0 gives pi/2.
double phase_shift(int m, double ka);

struct PhaseShiftTable {
  double ka = 0.0;
  int m_max = 0;
  std::vector<double> delta;             // principal branch
  std::vector<double> delta_continuous;  // branch followed continuously in m, 0 for m >> ka

  /// CSV with header m,ka,delta_m.
  void write_csv(std::ostream& out) const;
};

PhaseShiftTable make_phase_shift_table(double ka, int m_max);

/// Smallest order beyond which |delta_m| is negligible: ka + 10 ka^(1/3) + 10.
int converged_order(double ka);

struct CrossSectionReport {
  double ka = 0.0;
  double k = 0.0;
  double sigma_total = 0.0;
  std::vector<double> partial;  // per m >= 0, degeneracy of -m included
  double tail_fraction = 0.0;   // share of sigma from m > converged_order(ka)
  bool converged = false;
};

/// Relative tail share accepted as converged.
inline constexpr double kTailTolerance = 1e-8;

/// sigma = (4/k) [sin^2 delta_0 + 2 sum_{m>=1} sin^2 delta_m].
CrossSectionReport total_cross_section(const PhaseShiftTable& table, double k);

struct DeflectionCheck {
  int m = 0;
  double quantum = 0.0;
  double classical = 0.0;
  double relative_error = 0.0;
};

/// Compares the phase-shift difference |delta_{m+1} - delta_{m-1}| at
/// m = round(k |b|) with pi - 2 arcsin(|b|/a), where a = table.ka / k.
DeflectionCheck semiclassical_deflection_check(const PhaseShiftTable& table, double k, double b);

}  // namespace hdlab
