#include "flowq/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace flowq::harness {

std::vector<Json> expand_grid(const Json& grid, std::size_t cap) {
  if (!grid.is_object()) throw SchemaError("sweep.grid: must be an object");
  std::vector<std::string> keys;
  std::size_t total = 1;
  for (auto it = grid.begin(); it != grid.end(); ++it) {
    if (!it.value().is_array()) throw SchemaError("sweep.grid." + it.key() + ": must be an array");
    keys.push_back(it.key());
    const std::size_t n = it.value().size();
    if (n == 0) return {};
    if (total > cap / n + 1) throw SchemaError("sweep: grid exceeds the cap of " + std::to_string(cap) + " points");
    total *= n;
  }
  if (keys.empty()) return {};
  if (total > cap)
    throw SchemaError("sweep: grid has " + std::to_string(total) + " points, cap is " + std::to_string(cap));

  std::vector<Json> points;
  points.reserve(total);
  std::vector<std::size_t> idx(keys.size(), 0);
  for (std::size_t p = 0; p < total; ++p) {
    Json point = Json::object();
    for (std::size_t k = 0; k < keys.size(); ++k) point[keys[k]] = grid[keys[k]][idx[k]];
    points.push_back(std::move(point));
    for (std::size_t k = keys.size(); k-- > 0;) {
      if (++idx[k] < grid[keys[k]].size()) break;
      idx[k] = 0;
    }
  }
  return points;
}

namespace {

Cell json_cell(const Json& v) {
  if (v.is_null()) return std::monostate{};
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
  return v.dump();
}

}  // namespace

RunResult run_sweep(const Json& params, std::uint64_t seed, bool oracle_check) {
  Params p(params, "sweep");
  const std::string algorithm =
      p.choice("algorithm", std::nullopt, {"encode", "qae", "integrate", "copies", "qade", "qrk", "qlbm"});
  const Json base = p.object("base");
  const Json grid = p.has("grid") ? p.object("grid") : Json::object();
  const auto cap = static_cast<std::size_t>(p.integer("max_points", kDefaultSweepCap, 0, 1'000'000));
  const auto threads_req = static_cast<unsigned>(p.integer("threads", 0, 0, 256));
  p.finish();

  const std::vector<Json> points = expand_grid(grid, cap);
  std::vector<std::string> keys;
  for (auto it = grid.begin(); it != grid.end(); ++it) keys.push_back(it.key());

  std::vector<std::string> header = {"point", "seed"};
  header.insert(header.end(), keys.begin(), keys.end());
  const auto& metric_cols = summary_columns(algorithm);
  header.insert(header.end(), metric_cols.begin(), metric_cols.end());
  header.push_back("violations");

  std::vector<RunResult> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        Json merged = base;
        for (auto it = points[i].begin(); it != points[i].end(); ++it) merged[it.key()] = it.value();
        results[i] = run_algorithm(algorithm, merged, seed + i, oracle_check);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n_threads = threads_req ? threads_req : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(points.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RunResult out;
  out.data = CsvTable(header);
  Json rows = Json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<Cell> row = {static_cast<std::uint64_t>(i), seed + i};
    for (const auto& k : keys) row.push_back(json_cell(points[i][k]));
    for (const auto& c : metric_cols)
      row.push_back(results[i].metrics.contains(c) ? json_cell(results[i].metrics[c]) : Cell{});
    row.push_back(static_cast<std::uint64_t>(results[i].violations.size()));
    out.data.add_row(std::move(row));
    for (const auto& v : results[i].violations) out.violations.push_back("point " + std::to_string(i) + ": " + v);
  }
  out.metrics = {{"points", points.size()}, {"algorithm", algorithm}};
  return out;
}

}  // namespace flowq::harness
