#pragma once

#include <cstddef>
#include <vector>

namespace hdlab {

/// Two pointer states differing by per-disc displacements d_i.
struct PointerPair {
  std::vector<double> displacements;
  double width = 1.0;       // Delta, common to every disc packet
  double wavelength = 1.0;  // lambda

  std::size_t n_discs() const { return displacements.size(); }
};

/// |<g(x0, Delta) | g(x0 + d, Delta)>| = exp(-d^2 / (8 Delta^2)).
double gaussian_overlap(double d, double width);

/// Inverse of gaussian_overlap: displacement that yields the given overlap.
double displacement_for_overlap(double overlap, double width);

struct OverlapResult {
  double exact = 1.0;   // product of per-disc overlaps
  double approx = 1.0;  // exp(-sum delta_i)
  double relative_difference = 0.0;
};

OverlapResult pointer_overlap(const PointerPair& pair);

/// Per-disc return tolerance lambda / N (delta = 1/N).
double interference_precision(std::size_t n_discs, double wavelength);

/// General form delta * lambda for an explicit fraction delta.
double interference_precision_delta(double delta, double wavelength);

/// Margin reported when every error is zero.
inline constexpr double kMarginSentinel = 1e12;

struct InterferenceVerdict {
  bool interferes = false;
  double threshold = 0.0;
  double max_error = 0.0;
  double margin = 0.0;  // threshold / max_error, capped at kMarginSentinel
};

/// true iff max_i error_i <= lambda / N.
InterferenceVerdict interference_verdict(const std::vector<double>& errors, std::size_t n_discs, double wavelength);

}  // namespace hdlab
