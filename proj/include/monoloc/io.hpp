#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "monoloc/frames.hpp"
#include "monoloc/inference.hpp"
#include "monoloc/simulation.hpp"

namespace monoloc {

inline constexpr const char* kReportSchema = "monoloc/1";

/// Sensor CSV: header "x1,...,xd,y", one row per sensor, '.' decimal.
SensorDataset read_sensor_csv(const std::string& path);
void write_sensor_csv(const std::string& path, const SensorDataset& data);

nlohmann::json fit_report(const LocationEstimate& estimate, const SensorDataset& data);
nlohmann::json bootstrap_report(const BootstrapSummary& summary, const EstimatorSpec& spec,
                                const SensorDataset& data);
nlohmann::json frame_report(const PipelineReport& report);

/// Scenario documents mirror ScenarioConfig; `study`, `n` (scalar or list),
/// `methods`, and `bootstrap` extend it for the study runners.
struct ScenarioFile {
  std::string study = "variance";  // variance | coverage | generate
  ScenarioConfig scenario;
  std::vector<int> n_list;
  std::vector<Method> methods = {Method::SSCE, Method::LSE};
  BootstrapSpec bootstrap;
  double level = 0.90;
};

ScenarioFile read_scenario_json(const std::string& path);

std::string variance_rows_csv(const std::vector<VarianceStudyRow>& rows);
std::string coverage_rows_csv(const std::vector<CoverageStudyRow>& rows);
nlohmann::json variance_rows_json(const std::vector<VarianceStudyRow>& rows);
nlohmann::json coverage_rows_json(const std::vector<CoverageStudyRow>& rows);

void write_text_file(const std::string& path, const std::string& contents);

std::string method_name(Method method);
std::string direction_name(Direction direction);

}  // namespace monoloc
