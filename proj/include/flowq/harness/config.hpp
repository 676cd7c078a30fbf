#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowq/errors.hpp"

namespace flowq::harness {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Config does not match the schema (unknown key, wrong type, out of range).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A run finished but failed one of its oracle or conservation checks.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

const std::vector<std::string>& algorithm_names();

// {
//   "schema_version": 1,
//   "algorithm": "qae",
//   "seed": 7,
//   "params": { ... },
//   "output": { "dir": "out/qae" },
//   "oracle_check": true
// }
struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string algorithm;
  std::uint64_t seed = 0;
  Json params = Json::object();
  std::string out_dir = "out";
  bool oracle_check = true;
};

ExperimentConfig parse_config(const Json& j);
// Throws SchemaError for unreadable files or malformed JSON too.
ExperimentConfig load_config(const std::string& path);
Json config_to_json(const ExperimentConfig& cfg);

// Typed access to an algorithm's "params" block. Every getter records the
// key; finish() rejects anything that was never read.
class Params {
 public:
  Params(const Json& obj, std::string context);

  bool has(const std::string& key) const;
  double number(const std::string& key, std::optional<double> fallback, double lo, double hi);
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback, std::int64_t lo,
                       std::int64_t hi);
  bool flag(const std::string& key, bool fallback);
  std::string choice(const std::string& key, std::optional<std::string> fallback,
                     std::initializer_list<const char*> allowed);
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback,
                              std::size_t min_len = 0);
  std::vector<std::vector<double>> rows(const std::string& key, std::optional<std::vector<std::vector<double>>> fallback);
  Json object(const std::string& key);

  void finish() const;

 private:
  const Json* lookup(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  Json obj_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace flowq::harness
