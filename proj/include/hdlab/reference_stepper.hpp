#pragma once

#include <cstddef>

#include "hdlab/event_dynamics.hpp"
#include "hdlab/model_core.hpp"

namespace hdlab {

/// Brute-force global time stepping with bisection-localised contacts. Shares
/// no prediction code with EventEngine and serves as its reference.
struct SteppedRun {
  SystemState state;
  std::size_t disc_disc_events = 0;
  std::size_t wall_events = 0;
};

SteppedRun step_naively(const SystemState& initial, const EnclosureGeometry& geometry, double t_end, double dt);

}  // namespace hdlab
