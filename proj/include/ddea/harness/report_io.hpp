#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include <ddea/report.hpp>
#include <ddea/tracking.hpp>

namespace ddea::harness {

using json = nlohmann::json;

/// Formats a double with enough digits to round-trip ("%.17g").
std::string format_real(double v);

/// Report as a JSON object. Wall time is left out unless asked for, so that
/// reruns with the same config and seed serialize byte-identically.
json report_to_json(const json& config_echo, const RunReport<double>& report, bool include_timing = false);

/// generation,evals_used,evaluations,species_count,best_fitness,mean_fitness,partial
void write_generations_csv(std::ostream& out, const RunReport<double>& report);

/// tick,value_dB
void write_series_csv(std::ostream& out, const TrackingSeries<double>& series);
TrackingSeries<double> read_series_csv(std::istream& in);

/// tick,measured_dB,predicted_dB,log_error
void write_tracking_csv(std::ostream& out, const TrackingProblem<double>& problem, const TrackingResult<double>& result);

} // namespace ddea::harness
