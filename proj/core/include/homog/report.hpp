#pragma once

#include <iosfwd>
#include <string>

#include "homog/cell.hpp"
#include "homog/corrector.hpp"

namespace homog {

/// Shortest round-trip decimal formatting; all emitted floating-point text
/// goes through this so outputs are byte-reproducible.
std::string fmt_double(double v);

/// CSV with the fixed column set
/// epsilon,h,err_h1,err_l2,energy_fine,energy_hom,energy_gap,weak_gap,newton_iters,seconds
/// and LF line endings. The seconds column carries the deterministic cost
/// estimate; wall-clock timings live in the summary.
void write_report_csv(std::ostream& os, const ConvergenceReport& report);

/// Reads a CSV produced by write_report_csv back into records.
ConvergenceReport read_report_csv(std::istream& in);

/// Log-log SVG plot of the H1 errors and energy gaps with their fitted lines.
void write_report_svg(std::ostream& os, const ConvergenceReport& report);

}  // namespace homog
