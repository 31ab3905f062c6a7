#pragma once

#include <ostream>
#include <span>

#include "avalanche/epidemic/engine.hpp"

namespace avalanche::epidemic {

/// iteration,f_S,f_I,f_D
void write_time_series_csv(std::ostream& os, const TimeSeries& ts);
/// f_R,mean_f_I,stddev
void write_scan_csv(std::ostream& os, std::span<const ScanPoint> points);
/// row,col
void write_coords_csv(std::ostream& os, std::span<const Coord> cells);

}  // namespace avalanche::epidemic
