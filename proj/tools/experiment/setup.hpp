#pragma once

#include "config.hpp"
#include "rtetr/evolution.hpp"
#include "rtetr/medium.hpp"
#include "rtetr/timereversal.hpp"

namespace rtetr::experiment {

/// Grid, medium and time grid resolved from a config.
struct Setup {
  PhaseSpaceGrid grid;
  Medium medium;
  RegimeReport regime;
  TimeGrid time;
  bool tau_auto = false;
  bool dt_auto = false;
};

/// `refine` multiplies the cell count per axis and divides dt; refined
/// setups are used to generate synthetic data on a finer grid.
Setup make_setup(const ExperimentConfig& config, int refine = 1);

Medium make_medium(const ExperimentConfig& config, const PhaseSpaceGrid& grid, bool at_config_grid);

/// Field for an analytic profile, a random field (seeded) or a binary file.
Field make_profile(const PhaseSpaceGrid& grid, const ProfileSpec& spec, std::uint64_t seed);

/// Transfers an outflow trace from a grid refined by 2 (in space and time)
/// to the coarse grid: fine faces covering a coarse face are averaged and
/// every second time sample is kept. Rod1D and Box2D only.
Measurement coarsen_measurement(const PhaseSpaceGrid& fine, const Measurement& fine_data,
                                const PhaseSpaceGrid& coarse, const TimeGrid& coarse_time);

}  // namespace rtetr::experiment
