#pragma once

#include "tclfreq/metrics.hpp"
#include "tclfreq/scenario.hpp"

#include <string>

namespace tclfreq {

// CSV trace. Decimation 0 selects the default profile: every step until
// 60 s past the event, one row per second afterwards. Values are written
// in shortest round-trip form, so identical runs produce identical bytes.
void write_trace(const SimTrace& trace, const std::string& path, int decimation = 0);

std::string summary_to_json_text(const SimOutput& output, const PerformanceGains& gains,
                                 const RecoveryStats& recovery);

void write_summary(const SimOutput& output, const PerformanceGains& gains,
                   const RecoveryStats& recovery, const std::string& path);

std::string run_file_stem(const SimOutput& output, bool over_event);

} // namespace tclfreq
