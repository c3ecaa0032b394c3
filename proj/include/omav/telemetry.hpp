#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "omav/sim.hpp"

namespace omav {

/// Column names of the closed-loop CSV, in write order.
std::vector<std::string> telemetry_columns();
std::vector<std::string> zero_dynamics_columns();

void write_telemetry_csv(std::ostream& os, const std::vector<TelemetryRecord>& records);
void write_zero_dynamics_csv(std::ostream& os, const std::vector<ZeroDynamicsRecord>& records);

nlohmann::json summary_json(const RunSummary& s);
nlohmann::json zero_dynamics_json(const ZeroDynamicsResult& r);
nlohmann::json equilibrium_json(const EquilibriumSolution& sol, const RobotParams& p,
                                const Pose& C);

// creates missing parent directories; throws std::runtime_error when the file cannot be opened
void write_text_file(const std::string& path, const std::string& text);

}  // namespace omav
