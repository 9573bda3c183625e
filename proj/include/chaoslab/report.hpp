#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace chaoslab {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

enum class Status { pass, fail, inconclusive };
std::string to_string(Status s);

struct CheckRecord {
  std::string name;
  Status status = Status::inconclusive;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // positive when the check holds with room to spare
  std::optional<double> runtime;
  std::string note;
};

struct Report {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<CheckRecord> checks;
  nlohmann::json data = nlohmann::json::object();

  // value <= bound passes; margin = bound - value.
  CheckRecord& check_le(const std::string& name, double value, double bound, const std::string& note = "");
  // value > bound passes; margin = value - bound.
  CheckRecord& check_gt(const std::string& name, double value, double bound, const std::string& note = "");
  CheckRecord& check_true(const std::string& name, bool ok, const std::string& note = "");
  CheckRecord& add(CheckRecord c);

  [[nodiscard]] bool any_fail() const;
  [[nodiscard]] nlohmann::json to_json(bool timings) const;
};

// Sorted keys, doubles as %.17g, non-finite doubles as the strings "inf",
// "-inf", "nan". Output ends with a newline.
std::string canonical_dump(const nlohmann::json& j);
std::string environment_fingerprint();

// Throws Error on I/O failure.
void write_text(const std::string& path, const std::string& text);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
nlohmann::json read_json_file(const std::string& path);

// CHAOSLAB_WORKERS overrides the configured count; the result is >= 1.
int worker_count(int configured);
// Independent stream seed for randomized trial `stream` (splitmix64 mixing), so
// that per-trial draws do not depend on which worker runs the trial.
uint64_t derive_seed(uint64_t seed, uint64_t stream);
// Runs body(i) for i in [0, count) on up to `workers` threads. Results must be
// written to per-index slots so that the outcome does not depend on
// scheduling. The first exception is rethrown after all threads join.
void parallel_for(int count, int workers, const std::function<void(int)>& body);

}  // namespace chaoslab
