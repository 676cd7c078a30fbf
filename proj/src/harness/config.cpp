#include "flowq/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace flowq::harness {

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {"encode", "qae", "integrate", "copies",
                                                 "qade",   "qrk", "qlbm",      "sweep"};
  return names;
}

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw SchemaError("config: top level must be an object");
  static const std::set<std::string> allowed = {"schema_version", "algorithm", "seed", "params", "output",
                                                "oracle_check"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw SchemaError("config: unknown key '" + it.key() + "'");

  ExperimentConfig cfg;
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw SchemaError("config: schema_version must be an integer");
  cfg.schema_version = j["schema_version"].get<int>();
  if (cfg.schema_version != kSchemaVersion)
    throw SchemaError("config: unsupported schema_version " + std::to_string(cfg.schema_version));

  if (!j.contains("algorithm") || !j["algorithm"].is_string()) throw SchemaError("config: algorithm must be a string");
  cfg.algorithm = j["algorithm"].get<std::string>();
  bool known = false;
  for (const auto& n : algorithm_names()) known = known || n == cfg.algorithm;
  if (!known) throw SchemaError("config: unknown algorithm '" + cfg.algorithm + "'");

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw SchemaError("config: seed must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw SchemaError("config: params must be an object");
    cfg.params = j["params"];
  }
  if (j.contains("output")) {
    const Json& out = j["output"];
    if (!out.is_object()) throw SchemaError("config: output must be an object");
    for (auto it = out.begin(); it != out.end(); ++it)
      if (it.key() != "dir") throw SchemaError("config: unknown key 'output." + it.key() + "'");
    if (out.contains("dir")) {
      if (!out["dir"].is_string() || out["dir"].get<std::string>().empty())
        throw SchemaError("config: output.dir must be a non-empty string");
      cfg.out_dir = out["dir"].get<std::string>();
    }
  }
  if (j.contains("oracle_check")) {
    if (!j["oracle_check"].is_boolean()) throw SchemaError("config: oracle_check must be a boolean");
    cfg.oracle_check = j["oracle_check"].get<bool>();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Json j = Json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw SchemaError("config: '" + path + "' is not valid JSON");
  return parse_config(j);
}

Json config_to_json(const ExperimentConfig& cfg) {
  return Json{{"schema_version", cfg.schema_version},
              {"algorithm", cfg.algorithm},
              {"seed", cfg.seed},
              {"params", cfg.params},
              {"output", {{"dir", cfg.out_dir}}},
              {"oracle_check", cfg.oracle_check}};
}

Params::Params(const Json& obj, std::string context) : obj_(obj), context_(std::move(context)) {
  if (!obj_.is_object()) throw SchemaError(context_ + ": params must be an object");
}

bool Params::has(const std::string& key) const { return obj_.contains(key); }

const Json* Params::lookup(const std::string& key) {
  seen_.insert(key);
  auto it = obj_.find(key);
  return it == obj_.end() ? nullptr : &*it;
}

void Params::fail(const std::string& key, const std::string& what) const {
  throw SchemaError(context_ + "." + key + ": " + what);
}

double Params::number(const std::string& key, std::optional<double> fallback, double lo, double hi) {
  const Json* v = lookup(key);
  if (!v) {
    if (!fallback) fail(key, "required");
    return *fallback;
  }
  if (!v->is_number()) fail(key, "must be a number");
  const double x = v->get<double>();
  if (!std::isfinite(x) || x < lo || x > hi) {
    std::ostringstream msg;
    msg << "must lie in [" << lo << ", " << hi << "]";
    fail(key, msg.str());
  }
  return x;
}

std::int64_t Params::integer(const std::string& key, std::optional<std::int64_t> fallback, std::int64_t lo,
                             std::int64_t hi) {
  const Json* v = lookup(key);
  if (!v) {
    if (!fallback) fail(key, "required");
    return *fallback;
  }
  if (!v->is_number_integer()) fail(key, "must be an integer");
  const auto x = v->get<std::int64_t>();
  if (x < lo || x > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

bool Params::flag(const std::string& key, bool fallback) {
  const Json* v = lookup(key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(key, "must be a boolean");
  return v->get<bool>();
}

std::string Params::choice(const std::string& key, std::optional<std::string> fallback,
                           std::initializer_list<const char*> allowed) {
  const Json* v = lookup(key);
  std::string s;
  if (!v) {
    if (!fallback) fail(key, "required");
    s = *fallback;
  } else {
    if (!v->is_string()) fail(key, "must be a string");
    s = v->get<std::string>();
  }
  std::string options;
  for (const char* a : allowed) {
    if (s == a) return s;
    options += options.empty() ? a : std::string(", ") + a;
  }
  fail(key, "must be one of: " + options);
}

std::vector<double> Params::numbers(const std::string& key, std::optional<std::vector<double>> fallback,
                                    std::size_t min_len) {
  const Json* v = lookup(key);
  if (!v) {
    if (!fallback) fail(key, "required");
    return *fallback;
  }
  if (!v->is_array()) fail(key, "must be an array of numbers");
  std::vector<double> out;
  for (const Json& e : *v) {
    if (!e.is_number()) fail(key, "must be an array of numbers");
    out.push_back(e.get<double>());
    if (!std::isfinite(out.back())) fail(key, "entries must be finite");
  }
  if (out.size() < min_len) fail(key, "needs at least " + std::to_string(min_len) + " entries");
  return out;
}

std::vector<std::vector<double>> Params::rows(const std::string& key,
                                              std::optional<std::vector<std::vector<double>>> fallback) {
  const Json* v = lookup(key);
  if (!v) {
    if (!fallback) fail(key, "required");
    return *fallback;
  }
  if (!v->is_array() || v->empty()) fail(key, "must be a non-empty array of rows");
  std::vector<std::vector<double>> out;
  for (const Json& row : *v) {
    if (!row.is_array()) fail(key, "must be an array of rows");
    std::vector<double> r;
    for (const Json& e : row) {
      if (!e.is_number()) fail(key, "rows must hold numbers");
      r.push_back(e.get<double>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

Json Params::object(const std::string& key) {
  const Json* v = lookup(key);
  if (!v) return Json::object();
  if (!v->is_object()) fail(key, "must be an object");
  return *v;
}

void Params::finish() const {
  for (auto it = obj_.begin(); it != obj_.end(); ++it)
    if (!seen_.count(it.key())) throw SchemaError(context_ + ": unknown key '" + it.key() + "'");
}

}  // namespace flowq::harness
