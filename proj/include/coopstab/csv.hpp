#pragma once

// CSV writers for trajectories, discrete paths and histograms. Values are
// printed with %.17g so outputs round-trip and are byte-stable across runs.

#include <string>

#include "coopstab/action.hpp"
#include "coopstab/flow.hpp"
#include "coopstab/measure.hpp"

namespace coopstab {

/// Header t,x1,...,xr.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_path_csv(const std::string& path, const DiscretePath& dpath);

/// Header bin_center_1,...,bin_center_r,weight; zero-weight cells skipped.
void write_histogram_csv(const std::string& path, const StationaryEstimate& est);

std::string format_double(double v);

}  // namespace coopstab
