#pragma once

// Batch runner behind the dkl tool: one ExperimentConfig in, a CSV table and
// a JSON report out. CSV cells use shortest round-trip formatting and carry
// no timestamps, so equal configs give byte-identical CSV.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dkl/cache.hpp"
#include "dkl/config.hpp"
#include "dkl/delta.hpp"
#include "dkl/diophantine.hpp"
#include "dkl/moments.hpp"
#include "dkl/omega.hpp"
#include "dkl/version.hpp"
#include "dkl/voronoi.hpp"

namespace dkl {

using Json = nlohmann::ordered_json;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : columns_(header.size()) { append(header); }

  CsvTable& row() {
    if (!current_.empty()) flush();
    open_ = true;
    return *this;
  }
  CsvTable& cell(double v) { return push(format(v)); }
  CsvTable& cell(std::uint64_t v) { return push(std::to_string(v)); }
  CsvTable& cell(int v) { return push(std::to_string(v)); }
  CsvTable& cell(const std::optional<double>& v) { return push(v ? format(*v) : std::string()); }
  CsvTable& cell(const std::string& v) { return push(v); }

  std::string str() {
    if (open_) flush();
    return text_;
  }

  static std::string format(double v) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
  }

 private:
  CsvTable& push(std::string s) {
    current_.push_back(std::move(s));
    return *this;
  }
  void flush() {
    require(current_.size() == columns_, ErrorKind::validation, "csv row has the wrong number of cells");
    append(current_);
    current_.clear();
    open_ = false;
  }
  void append(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::size_t columns_;
  std::vector<std::string> current_;
  std::string text_;
  bool open_ = false;
};

struct ExperimentOutput {
  std::string csv;
  Json results;  // experiment-specific part of the JSON report
};

struct ReportPaths {
  std::filesystem::path csv;
  std::filesystem::path json;
};

namespace experiment_detail {

inline double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

inline std::uint64_t ceil_limit(double x) { return static_cast<std::uint64_t>(std::ceil(x)) + 1; }

/// Table size the experiment needs, never smaller than config.limit.
inline std::uint64_t required_limit(const ExperimentConfig& c) {
  std::uint64_t need = 0;
  switch (c.experiment) {
    case ExperimentKind::sieve:
    case ExperimentKind::count:
      break;
    case ExperimentKind::delta:
    case ExperimentKind::moments:
    case ExperimentKind::omega:
      need = ceil_limit(max_of(c.x));
      break;
    case ExperimentKind::voronoi:
      need = ceil_limit(2.0 * max_of(c.x));
      break;
    case ExperimentKind::short_interval:
      need = ceil_limit(max_of(c.x) + max_of(c.h));
      break;
    case ExperimentKind::shiu:
      need = ceil_limit(2.0 * (c.x.empty() ? 1e6 : max_of(c.x)));
      break;
  }
  return std::max(need, c.limit);
}

inline std::shared_ptr<const DivisorTable> load_table(const ExperimentConfig& c, int k, std::uint64_t limit,
                                                      Json* info = nullptr) {
  if (c.cache_dir.empty()) {
    if (info) (*info)["cache"] = nullptr;
    return std::make_shared<DivisorTable>(sieve_dk(k, limit));
  }
  auto handle = cache_table(k, limit, c.cache_dir, c.rebuild_cache);
  if (info) {
    (*info)["cache"] = {{"path", handle.path.string()}, {"built", handle.built}, {"file_bytes", handle.file_bytes}};
  }
  return handle.table;
}

inline DeltaEvaluator make_evaluator(const ExperimentConfig& c, Json& info) {
  const auto limit = required_limit(c);
  info["table_limit"] = limit;
  auto table = load_table(c, c.k, limit, &info);
  return DeltaEvaluator(std::move(table), main_term_coeffs(c.k));
}

inline unsigned threads(const ExperimentConfig& c) { return c.threads == 0 ? default_thread_count() : c.threads; }

inline Json record_json(const ExtremaRecord& r) {
  Json j = {{"x", r.x}, {"delta_value", r.delta_value}, {"ratio_power", r.ratio_power}};
  j["ratio_G"] = r.ratio_g ? Json(*r.ratio_g) : Json(nullptr);
  j["sign"] = r.sign;
  return j;
}

inline ExperimentOutput run_sieve(const ExperimentConfig& c) {
  Json info;
  const auto table = load_table(c, c.k, c.limit, &info);
  std::uint64_t max_value = 0;
  for (std::uint64_t n = 1; n <= table->limit(); ++n) max_value = std::max<std::uint64_t>(max_value, (*table)[n]);
  const std::uint64_t total = table->summatory(table->limit());
  const std::uint64_t bytes = c.cache_dir.empty() ? encode_table(*table).size()
                                                  : info["cache"]["file_bytes"].get<std::uint64_t>();
  CsvTable csv({"k", "limit", "summatory", "max_value", "file_bytes"});
  csv.row().cell(c.k).cell(table->limit()).cell(total).cell(max_value).cell(bytes);
  info["summatory"] = total;
  info["max_value"] = max_value;
  info["file_bytes"] = bytes;
  return {csv.str(), info};
}

inline ExperimentOutput run_delta(const ExperimentConfig& c) {
  Json info;
  const auto ev = make_evaluator(c, info);
  CsvTable csv({"k", "x", "summatory", "main_term", "delta"});
  for (double x : c.x) {
    csv.row().cell(c.k).cell(x).cell(ev.summatory(floor_safe(x))).cell(ev.main_term(x)).cell(ev.delta(x));
  }
  info["main_term_coeffs"] = ev.polynomial().coeffs;
  info["provenance"] = ev.polynomial().provenance == Provenance::closed_form ? "closed-form" : "residue-oracle";
  return {csv.str(), info};
}

inline ExperimentOutput run_voronoi(const ExperimentConfig& c) {
  Json info;
  const auto ev = make_evaluator(c, info);
  CsvTable csv({"k", "N", "X", "sample_count", "rms_error", "max_error", "fitted_slope"});
  Json profiles = Json::array();
  for (double x : c.x) {
    const auto p = truncation_error_profile(ev, x, static_cast<int>(c.samples), c.n, c.seed);
    Json rows = Json::array();
    for (const auto& r : p.rows) {
      csv.row().cell(p.k).cell(r.terms).cell(p.x_base).cell(p.sample_count).cell(r.rms_error).cell(r.max_error).cell(
          p.fitted_slope);
      rows.push_back({{"N", r.terms}, {"rms_error", r.rms_error}, {"max_error", r.max_error}});
    }
    profiles.push_back({{"X", x},
                        {"fitted_slope", p.fitted_slope ? Json(*p.fitted_slope) : Json(nullptr)},
                        {"predicted_slope", -1.0 / c.k},
                        {"rows", rows}});
  }
  info["profiles"] = profiles;
  return {csv.str(), info};
}

inline ExperimentOutput run_moments(const ExperimentConfig& c) {
  Json info;
  const auto ev = make_evaluator(c, info);
  const auto fit = fit_moment_constant(ev, c.m, c.x, c.order);
  CsvTable csv({"k", "m", "a", "b", "value", "normalization", "order"});
  Json series = Json::array();
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    csv.row().cell(c.k).cell(c.m).cell(1.0).cell(c.x[i]).cell(fit.values[i]).cell(fit.residual_series[i].second).cell(
        c.order);
    series.push_back({{"X", c.x[i]}, {"value", fit.values[i]}, {"normalized", fit.residual_series[i].second}});
  }
  info["fit"] = {{"k", fit.k},
                 {"m", fit.m},
                 {"exponent_fixed", fit.exponent_fixed},
                 {"fitted_constant", fit.fitted_constant},
                 {"residual_series", series}};
  if (c.m == 2) info["series_constant"] = mean_square_constant(c.k);
  return {csv.str(), info};
}

inline ExperimentOutput run_short_interval(const ExperimentConfig& c) {
  Json info;
  const auto ev = make_evaluator(c, info);
  CsvTable csv({"k", "X", "H", "value", "long_term", "short_term", "ratio"});
  Json rows = Json::array();
  for (double x : c.x) {
    for (double h : c.h) {
      const auto r = short_interval_fourth_moment(ev, x, h);
      const double ratio = r.value / (r.long_term + r.short_term);
      csv.row().cell(c.k).cell(x).cell(h).cell(r.value).cell(r.long_term).cell(r.short_term).cell(ratio);
      Json row = {{"X", x}, {"H", h}, {"value", r.value}, {"long_term", r.long_term}, {"short_term", r.short_term},
                  {"ratio", ratio}};
      if (c.k == 2 && h >= std::sqrt(x)) {
        const auto hx = huxley_bound_check(ev, x, h, kAlphaFloor);
        row["huxley"] = {{"alpha", hx.huxley.alpha}, {"exponent", hx.huxley.exponent}, {"ratio", hx.huxley.ratio}};
        row["alpha_floor"] = {
            {"alpha", hx.estimated.alpha}, {"exponent", hx.estimated.exponent}, {"ratio", hx.estimated.ratio}};
      }
      rows.push_back(row);
    }
  }
  info["rows"] = rows;
  return {csv.str(), info};
}

inline std::vector<double> deltas_for(const ExperimentConfig& c, std::uint64_t n) {
  std::vector<double> out = c.delta;
  for (double e : c.delta_exp) out.push_back(std::pow(static_cast<double>(n), -e));
  return out;
}

inline ExperimentOutput run_count(const ExperimentConfig& c) {
  std::vector<CountResult> results;
  for (auto n : c.n) {
    for (double d : deltas_for(c, n)) results.push_back(count_2l_tuples(c.k, c.l, n, d, c.memory_budget));
  }
  const auto report = bound_report(results);
  CsvTable csv({"k", "l", "N", "delta", "count", "bound_main", "bound_diag", "ratio", "flagged_boundary_pairs"});
  Json rows = Json::array();
  for (const auto& row : report) {
    const auto& r = row.result;
    csv.row().cell(r.k).cell(r.l).cell(r.n).cell(r.delta).cell(r.count).cell(r.bound_main).cell(r.bound_diag).cell(
        row.ratio).cell(r.flagged_boundary_pairs);
    rows.push_back({{"N", r.n},
                    {"delta", r.delta},
                    {"count", r.count},
                    {"ratio_max", row.ratio},
                    {"ratio_sum", row.ratio_sum},
                    {"delta_exponent", row.delta_exponent},
                    {"log_n_trend", row.log_n_trend ? Json(*row.log_n_trend) : Json(nullptr)}});
  }
  Json info;
  info["rows"] = rows;
  return {csv.str(), info};
}

inline ExperimentOutput run_omega(const ExperimentConfig& c) {
  Json info;
  const auto ev = make_evaluator(c, info);
  const auto x_max = floor_safe(c.x.front());
  const auto scan = scan_extrema(ev, x_max, c.top, threads(c));
  CsvTable csv({"x", "delta_value", "ratio_power", "ratio_G", "sign"});
  for (const auto& r : scan.envelope) {
    csv.row().cell(r.x).cell(r.delta_value).cell(r.ratio_power).cell(r.ratio_g).cell(r.sign);
  }
  Json top = Json::array(), top_g = Json::array(), runs = Json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(10, scan.top_by_power.size()); ++i)
    top.push_back(record_json(scan.top_by_power[i]));
  for (std::size_t i = 0; i < std::min<std::size_t>(10, scan.top_by_g.size()); ++i)
    top_g.push_back(record_json(scan.top_by_g[i]));
  for (const auto& run : scan.longest_sign_runs)
    runs.push_back({{"start", run.start}, {"end", run.end}, {"sign", run.sign}, {"length", run.length()}});
  info["points_scanned"] = scan.points_scanned;
  info["exact_zeros"] = scan.exact_zeros;
  info["max_g_form_discrepancy"] = scan.max_g_form_discrepancy;
  info["top_by_power"] = top;
  info["top_by_G"] = top_g;
  info["longest_sign_runs"] = runs;
  try {
    const auto alpha = estimate_alpha(scan.envelope, c.x_min_fit);
    info["alpha"] = {{"estimate", alpha.alpha},
                     {"points_used", alpha.points_used},
                     {"within_sanity_bound", alpha.within_sanity_bound},
                     {"floor", kAlphaFloor},
                     {"huxley", kAlphaHuxley}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::insufficient) throw;
    info["alpha"] = {{"estimate", nullptr}, {"reason", e.what()}};
  }
  return {csv.str(), info};
}

inline ExperimentOutput run_shiu(const ExperimentConfig& c) {
  Json info;
  const auto ev = make_evaluator(c, info);
  CsvTable csv({"x", "h", "sum", "ratio"});
  for (double x : c.x) {
    for (double h : c.h) {
      const auto r = shiu_check(ev, x, h);
      csv.row().cell(x).cell(h).cell(r.sum).cell(r.ratio);
    }
  }
  if (c.samples > 0) {
    const double hi = c.x.empty() ? 1e6 : max_of(c.x);
    const auto sweep = shiu_sweep(ev, c.samples, hi / 1000.0 < 2.0 ? 2.0 : hi / 1000.0, hi, c.seed);
    info["sweep"] = {{"samples", sweep.samples},
                     {"x_lo", std::max(2.0, hi / 1000.0)},
                     {"x_hi", hi},
                     {"max_ratio", sweep.max_ratio},
                     {"worst_x", sweep.worst_x},
                     {"worst_h", sweep.worst_h},
                     {"flagged", sweep.max_ratio > 10.0}};
  }
  return {csv.str(), info};
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace experiment_detail

/// Runs the experiment and returns the CSV text and the result part of the
/// JSON report, without touching the output paths.
inline ExperimentOutput run_experiment_in_memory(const ExperimentConfig& c) {
  validate(c);
  using namespace experiment_detail;
  switch (c.experiment) {
    case ExperimentKind::sieve: return run_sieve(c);
    case ExperimentKind::delta: return run_delta(c);
    case ExperimentKind::voronoi: return run_voronoi(c);
    case ExperimentKind::moments: return run_moments(c);
    case ExperimentKind::short_interval: return run_short_interval(c);
    case ExperimentKind::count: return run_count(c);
    case ExperimentKind::omega: return run_omega(c);
    case ExperimentKind::shiu: return run_shiu(c);
  }
  fail(ErrorKind::config, "unknown experiment");
}

/// Runs the experiment and writes <out>.csv and <out>.json.
inline ReportPaths run_experiment(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  auto output = run_experiment_in_memory(c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ReportPaths paths{c.out + ".csv", c.out + ".json"};
  if (paths.csv.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(paths.csv.parent_path(), ec);
    require(!ec, ErrorKind::resource, "cannot create output directory " + paths.csv.parent_path().string());
  }
  Json report;
  report["tool"] = "dkl";
  report["version"] = std::string(kVersion);
  report["timestamp"] = experiment_detail::utc_timestamp();
  report["wall_time_s"] = wall;
  report["experiment"] = std::string(to_string(c.experiment));
  report["config"] = serialize(c);
  report["csv"] = paths.csv.filename().string();
  report["results"] = std::move(output.results);

  std::ofstream csv(paths.csv, std::ios::binary | std::ios::trunc);
  csv << output.csv;
  require(static_cast<bool>(csv), ErrorKind::resource, "cannot write " + paths.csv.string());
  std::ofstream json(paths.json, std::ios::binary | std::ios::trunc);
  json << report.dump(2) << '\n';
  require(static_cast<bool>(json), ErrorKind::resource, "cannot write " + paths.json.string());
  return paths;
}

}  // namespace dkl
