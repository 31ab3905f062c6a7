#include "avalanche/epidemic/export.hpp"

#include "avalanche/io/csv.hpp"

namespace avalanche::epidemic {

using io::format_double;

void write_time_series_csv(std::ostream& os, const TimeSeries& ts) {
    io::write_header(os, {"iteration", "f_S", "f_I", "f_D"});
    for (const auto& r : ts.records) {
        os << r.iteration << ',' << format_double(r.f_S) << ',' << format_double(r.f_I) << ','
           << format_double(r.f_D) << '\n';
    }
}

void write_scan_csv(std::ostream& os, std::span<const ScanPoint> points) {
    io::write_header(os, {"f_R", "mean_f_I", "stddev"});
    for (const auto& p : points) {
        os << format_double(p.f_R) << ',' << format_double(p.mean_f_I) << ','
           << format_double(p.stddev) << '\n';
    }
}

void write_coords_csv(std::ostream& os, std::span<const Coord> cells) {
    io::write_header(os, {"row", "col"});
    for (const Coord& c : cells) os << c.row << ',' << c.col << '\n';
}

}  // namespace avalanche::epidemic
