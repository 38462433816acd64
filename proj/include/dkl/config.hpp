#pragma once

// Experiment configuration: a small INI dialect.
//
//   # comment
//   [experiment]
//   name = moments
//   seed = 42
//   [params]
//   k = 2
//   x = 10000, 100000
//
// Lists are comma separated. serialize() emits every field in a fixed order
// with shortest round-trip number formatting, so parse(serialize(c)) == c.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "dkl/errors.hpp"

namespace dkl {

enum class ExperimentKind { sieve, delta, voronoi, moments, short_interval, count, omega, shiu };

inline constexpr std::array<std::pair<ExperimentKind, std::string_view>, 8> kExperimentNames = {{
    {ExperimentKind::sieve, "sieve"},
    {ExperimentKind::delta, "delta"},
    {ExperimentKind::voronoi, "voronoi"},
    {ExperimentKind::moments, "moments"},
    {ExperimentKind::short_interval, "short-interval"},
    {ExperimentKind::count, "count"},
    {ExperimentKind::omega, "omega"},
    {ExperimentKind::shiu, "shiu"},
}};

inline std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames)
    if (k == kind) return name;
  return "?";
}

inline std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (const auto& [k, n] : kExperimentNames)
    if (n == name) return k;
  return std::nullopt;
}

// Resource limits enforced by validate().
inline constexpr std::uint64_t kMaxSieveLimit = 400'000'000;  // 1.6 GB of u32 counts
inline constexpr std::uint64_t kMaxCountN = 4096;
inline constexpr std::uint64_t kMaxTripleCountN = 512;
inline constexpr std::uint64_t kMaxSamples = 1'000'000;

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::sieve;
  std::uint64_t seed = 42;

  int k = 2;
  int m = 2;
  int l = 2;
  int order = 8;
  std::uint64_t limit = 0;  // 0: derive from the ranges
  std::vector<double> x;
  std::vector<double> h;
  std::vector<std::uint64_t> n;
  std::vector<double> delta;      // absolute window widths
  std::vector<double> delta_exp;  // or delta = N^{-e}
  std::uint64_t samples = 0;
  std::uint64_t top = 10;
  double x_min_fit = 1000.0;
  std::uint64_t memory_budget = 1ULL << 30U;
  unsigned threads = 0;  // 0: hardware concurrency

  std::string out = "dkl_out";
  std::string cache_dir;  // empty: no caching
  bool rebuild_cache = false;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

template <typename T>
std::string format_list(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      s += format_double(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  } else {
    // Integers also accept exact scientific notation such as 1e6.
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) {
      double d = 0;
      auto [pd, ecd] = std::from_chars(t.data(), t.data() + t.size(), d);
      if (ecd != std::errc() || pd != t.data() + t.size() || d != std::floor(d) || d < 0 || d > 9.0e18)
        return std::nullopt;
      v = static_cast<T>(d);
    }
  }
  return v;
}

template <typename T>
std::optional<std::vector<T>> parse_list(std::string_view text) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    auto v = parse_number<T>(item);
    if (!v) return std::nullopt;
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<bool> parse_bool(std::string_view text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  return std::nullopt;
}

}  // namespace config_detail

/// Thrown by parse and validate; what() joins the individual violations.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(ErrorKind::config, join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& item : v) s += "\n  - " + item;
    return s;
  }
  std::vector<std::string> violations_;
};

inline std::string serialize(const ExperimentConfig& c) {
  using config_detail::format_double;
  using config_detail::format_list;
  std::ostringstream o;
  o << "[experiment]\n";
  o << "name = " << to_string(c.experiment) << "\n";
  o << "seed = " << c.seed << "\n";
  o << "\n[params]\n";
  o << "k = " << c.k << "\n";
  o << "m = " << c.m << "\n";
  o << "l = " << c.l << "\n";
  o << "order = " << c.order << "\n";
  o << "limit = " << c.limit << "\n";
  o << "x = " << format_list(c.x) << "\n";
  o << "h = " << format_list(c.h) << "\n";
  o << "n = " << format_list(c.n) << "\n";
  o << "delta = " << format_list(c.delta) << "\n";
  o << "delta_exp = " << format_list(c.delta_exp) << "\n";
  o << "samples = " << c.samples << "\n";
  o << "top = " << c.top << "\n";
  o << "x_min_fit = " << format_double(c.x_min_fit) << "\n";
  o << "memory_budget = " << c.memory_budget << "\n";
  o << "threads = " << c.threads << "\n";
  o << "\n[output]\n";
  o << "out = " << c.out << "\n";
  o << "cache_dir = " << c.cache_dir << "\n";
  o << "rebuild_cache = " << (c.rebuild_cache ? "true" : "false") << "\n";
  return o.str();
}

/// Parses the INI text. Unknown keys, unknown sections and malformed values
/// are all collected and reported together.
inline ExperimentConfig parse_config(std::string_view text) {
  using namespace config_detail;
  ExperimentConfig c;
  std::vector<std::string> errors;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "unterminated section header");
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "experiment" && section != "params" && section != "output")
        errors.push_back(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const std::string full = section + "." + key;
    bool ok = true;

    auto set_int = [&](auto& field) {
      using T = std::remove_reference_t<decltype(field)>;
      if (auto v = parse_number<long long>(value); v && *v >= 0 && static_cast<unsigned long long>(*v) <= std::numeric_limits<T>::max()) {
        field = static_cast<T>(*v);
      } else {
        ok = false;
      }
    };
    auto set_u64 = [&](std::uint64_t& field) {
      if (auto v = parse_number<std::uint64_t>(value)) field = *v; else ok = false;
    };
    auto set_double = [&](double& field) {
      if (auto v = parse_number<double>(value)) field = *v; else ok = false;
    };
    auto set_doubles = [&](std::vector<double>& field) {
      if (auto v = parse_list<double>(value)) field = *v; else ok = false;
    };

    if (full == "experiment.name") {
      if (auto kind = parse_experiment_kind(value)) c.experiment = *kind; else ok = false;
    } else if (full == "experiment.seed") {
      set_u64(c.seed);
    } else if (full == "params.k") {
      set_int(c.k);
    } else if (full == "params.m") {
      set_int(c.m);
    } else if (full == "params.l") {
      set_int(c.l);
    } else if (full == "params.order") {
      set_int(c.order);
    } else if (full == "params.limit") {
      set_u64(c.limit);
    } else if (full == "params.x") {
      set_doubles(c.x);
    } else if (full == "params.h") {
      set_doubles(c.h);
    } else if (full == "params.n") {
      if (auto v = parse_list<std::uint64_t>(value)) c.n = *v; else ok = false;
    } else if (full == "params.delta") {
      set_doubles(c.delta);
    } else if (full == "params.delta_exp") {
      set_doubles(c.delta_exp);
    } else if (full == "params.samples") {
      set_u64(c.samples);
    } else if (full == "params.top") {
      set_u64(c.top);
    } else if (full == "params.x_min_fit") {
      set_double(c.x_min_fit);
    } else if (full == "params.memory_budget") {
      set_u64(c.memory_budget);
    } else if (full == "params.threads") {
      set_int(c.threads);
    } else if (full == "output.out") {
      c.out = value;
    } else if (full == "output.cache_dir") {
      c.cache_dir = value;
    } else if (full == "output.rebuild_cache") {
      if (auto v = parse_bool(value)) c.rebuild_cache = *v; else ok = false;
    } else {
      errors.push_back(where + "unknown key '" + key + "' in section [" + section + "]");
      continue;
    }
    if (!ok) errors.push_back(where + "bad value for " + full + ": '" + value + "'");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::config, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Every violation of the experiment's preconditions and resource limits.
inline std::vector<std::string> validation_errors(const ExperimentConfig& c) {
  std::vector<std::string> v;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) v.push_back(msg);
  };
  auto positive_list = [&](const std::vector<double>& xs, const char* name, double lo) {
    for (double x : xs) {
      if (!(x >= lo)) {
        v.push_back(std::string(name) + " entries must be >= " + config_detail::format_double(lo));
        return;
      }
    }
  };
  auto every_pair = [&](auto ok) {
    for (double x : c.x)
      for (double h : c.h)
        if (!ok(x, h)) return false;
    return true;
  };
  need(c.limit <= kMaxSieveLimit, "limit exceeds " + std::to_string(kMaxSieveLimit));
  need(c.threads <= 256, "threads must be <= 256");
  need(!c.out.empty(), "out must name an output prefix");

  switch (c.experiment) {
    case ExperimentKind::sieve:
      need(c.k >= 1 && c.k <= 6, "sieve needs 1 <= k <= 6");
      need(c.limit >= 1, "sieve needs limit >= 1");
      break;
    case ExperimentKind::delta:
    case ExperimentKind::voronoi:
    case ExperimentKind::moments:
    case ExperimentKind::short_interval:
    case ExperimentKind::omega:
      need(c.k >= 2 && c.k <= 4, "k must lie in [2, 4] for " + std::string(to_string(c.experiment)));
      break;
    case ExperimentKind::count:
      need(c.k >= 2 && c.k <= 6, "count needs 2 <= k <= 6");
      break;
    case ExperimentKind::shiu:
      need(c.k == 2, "shiu applies to k = 2 only");
      break;
  }

  switch (c.experiment) {
    case ExperimentKind::sieve:
      break;
    case ExperimentKind::delta:
      need(!c.x.empty(), "delta needs a nonempty x list");
      positive_list(c.x, "x", 1.0);
      break;
    case ExperimentKind::voronoi:
      need(!c.x.empty(), "voronoi needs a nonempty x list (X values)");
      positive_list(c.x, "x", 2.0);
      need(!c.n.empty(), "voronoi needs a nonempty n list (truncation lengths)");
      need(std::none_of(c.n.begin(), c.n.end(), [](auto n) { return n == 0; }), "n entries must be >= 1");
      need(c.samples >= 8 && c.samples <= kMaxSamples, "voronoi needs 8 <= samples <= " + std::to_string(kMaxSamples));
      break;
    case ExperimentKind::moments:
      need(c.m >= 1 && c.m <= 9, "m must lie in [1, 9]");
      need(c.order >= 4 && c.order <= 16, "order must lie in [4, 16]");
      need(c.x.size() >= 4, "moments needs at least 4 x values");
      positive_list(c.x, "x", 1.0);
      need(std::is_sorted(c.x.begin(), c.x.end()) &&
               std::adjacent_find(c.x.begin(), c.x.end()) == c.x.end(),
           "x list must be strictly increasing");
      break;
    case ExperimentKind::short_interval:
      need(!c.x.empty() && !c.h.empty(), "short-interval needs nonempty x and h lists");
      positive_list(c.x, "x", 2.0);
      positive_list(c.h, "h", 1.0);
      need(every_pair([](double x, double h) { return h <= x / 2; }), "short-interval needs h <= x/2 for every pair");
      break;
    case ExperimentKind::count:
      need(c.l == 2 || c.l == 3, "l must be 2 or 3");
      need(!c.n.empty(), "count needs a nonempty n list");
      for (auto n : c.n) {
        if (n < 3 || n > (c.l == 3 ? kMaxTripleCountN : kMaxCountN)) {
          v.push_back("count n entries must lie in [3, " +
                      std::to_string(c.l == 3 ? kMaxTripleCountN : kMaxCountN) + "]");
          break;
        }
      }
      need(!c.delta.empty() || !c.delta_exp.empty(), "count needs delta or delta_exp values");
      for (double d : c.delta)
        if (!(d > 0)) {
          v.push_back("delta entries must be > 0");
          break;
        }
      need(c.memory_budget >= 4096, "memory_budget must be at least 4096 bytes");
      break;
    case ExperimentKind::omega:
      need(c.x.size() == 1, "omega needs exactly one x (the scan end)");
      positive_list(c.x, "x", 2.0);
      need(c.top >= 1 && c.top <= 100'000, "top must lie in [1, 100000]");
      need(c.x_min_fit >= 1.0, "x_min_fit must be >= 1");
      break;
    case ExperimentKind::shiu:
      need(!c.x.empty() || c.samples > 0, "shiu needs x values or samples > 0");
      positive_list(c.x, "x", 2.0);
      need(every_pair([](double x, double h) { return h >= std::pow(x, 0.1) && h <= x; }),
           "shiu needs x^0.1 <= h <= x for every pair");
      need(c.samples <= kMaxSamples, "samples exceeds " + std::to_string(kMaxSamples));
      break;
  }
  for (double x : c.x)
    if (x > static_cast<double>(kMaxSieveLimit) / 2) {
      v.push_back("x values must be <= " + std::to_string(kMaxSieveLimit / 2));
      break;
    }
  return v;
}

inline void validate(const ExperimentConfig& c) {
  auto v = validation_errors(c);
  if (!v.empty()) throw ConfigError(std::move(v));
}

}  // namespace dkl
