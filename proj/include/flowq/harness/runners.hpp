#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "flowq/harness/config.hpp"
#include "flowq/harness/csv.hpp"

namespace flowq::harness {

struct RunResult {
  Json metrics = Json::object();  // flat scalars, keys drawn from summary_columns()
  Json details = Json::object();
  CsvTable data;
  std::vector<std::string> violations;  // failed oracle / conservation checks
};

// Every metric key a run of `algorithm` may produce, in report order.
const std::vector<std::string>& summary_columns(const std::string& algorithm);

// Validates params (SchemaError) before doing any work.
RunResult run_algorithm(const std::string& algorithm, const Json& params, std::uint64_t seed, bool oracle_check);

// report.json: deterministic in (config, seed, version). No clock readings.
Json make_report(const ExperimentConfig& cfg, const RunResult& r);
// metadata.json: wall time and start timestamp.
Json make_metadata(const ExperimentConfig& cfg, double wall_seconds);

void write_outputs(const std::string& dir, const ExperimentConfig& cfg, const RunResult& r, double wall_seconds);

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitSchema = 2, kExitInvariant = 3 };

// Runs the config, writes report.json / data.csv / metadata.json into
// cfg.out_dir and maps errors to exit codes. Diagnostics go to `log`.
int execute(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace flowq::harness
