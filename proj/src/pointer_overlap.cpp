#include "hdlab/pointer_overlap.hpp"

#include <algorithm>
#include <cmath>

#include "hdlab/errors.hpp"

namespace hdlab {

double gaussian_overlap(double d, double width) {
  if (!(width > 0.0)) throw ContractViolation("gaussian_overlap: width must be positive");
  const double r = d / width;
  return std::exp(-r * r / 8.0);
}

double displacement_for_overlap(double overlap, double width) {
  if (!(overlap > 0.0 && overlap <= 1.0)) throw ContractViolation("displacement_for_overlap: overlap outside (0, 1]");
  return width * std::sqrt(-8.0 * std::log(overlap));
}

OverlapResult pointer_overlap(const PointerPair& pair) {
  if (pair.displacements.empty()) throw ContractViolation("pointer_overlap: need at least one disc");
  OverlapResult r;
  double log_exact = 0.0;
  double sum_delta = 0.0;
  for (double d : pair.displacements) {
    if (d < 0.0) throw ContractViolation("pointer_overlap: displacements must be non-negative");
    const double g = gaussian_overlap(d, pair.width);
    log_exact += std::log(g);
    sum_delta += 1.0 - g;
  }
  r.exact = std::exp(log_exact);
  r.approx = std::exp(-sum_delta);
  r.relative_difference = r.exact > 0.0 ? std::abs(r.exact - r.approx) / r.exact : 0.0;
  return r;
}

double interference_precision(std::size_t n_discs, double wavelength) {
  if (n_discs < 1) throw ContractViolation("interference_precision: N must be at least 1");
  return interference_precision_delta(1.0 / static_cast<double>(n_discs), wavelength);
}

double interference_precision_delta(double delta, double wavelength) {
  if (!(wavelength > 0.0)) throw ContractViolation("interference_precision: wavelength must be positive");
  if (!(delta > 0.0)) throw ContractViolation("interference_precision: delta must be positive");
  return delta * wavelength;
}

InterferenceVerdict interference_verdict(const std::vector<double>& errors, std::size_t n_discs, double wavelength) {
  InterferenceVerdict v;
  v.threshold = interference_precision(n_discs, wavelength);
  for (double e : errors) v.max_error = std::max(v.max_error, std::abs(e));
  v.interferes = v.max_error <= v.threshold;
  v.margin = v.max_error > 0.0 ? std::min(kMarginSentinel, v.threshold / v.max_error) : kMarginSentinel;
  return v;
}

}  // namespace hdlab
