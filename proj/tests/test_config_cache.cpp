#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "dkl/cache.hpp"
#include "dkl/config.hpp"
#include "dkl/experiments.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dkl_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dkl::ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const dkl::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return dkl::ErrorKind::config;
}

}  // namespace

TEST(Config, RoundTrip) {
  dkl::ExperimentConfig c;
  c.experiment = dkl::ExperimentKind::count;
  c.seed = 7;
  c.k = 3;
  c.l = 3;
  c.n = {16, 32};
  c.delta = {0.001, 1e-7};
  c.delta_exp = {1.5};
  c.x = {0.1, 12345.678};
  c.memory_budget = 1 << 20;
  c.threads = 2;
  c.out = "out/run";
  c.cache_dir = "/tmp/cache";
  c.rebuild_cache = true;
  const auto text = dkl::serialize(c);
  EXPECT_EQ(dkl::parse_config(text), c);
  EXPECT_EQ(dkl::serialize(dkl::parse_config(text)), text);
  EXPECT_EQ(dkl::parse_config(dkl::serialize(dkl::ExperimentConfig{})), dkl::ExperimentConfig{});
}

TEST(Config, CommentsAndScientificIntegers) {
  const auto c = dkl::parse_config(
      "# header\n[experiment]\nname = short-interval ; trailing\n\n[params]\nlimit = 1e6\nx = 1e3, 2e3\nh=10\n");
  EXPECT_EQ(c.experiment, dkl::ExperimentKind::short_interval);
  EXPECT_EQ(c.limit, 1'000'000U);
  EXPECT_EQ(c.x, (std::vector<double>{1000.0, 2000.0}));
  EXPECT_EQ(c.h, (std::vector<double>{10.0}));
}

TEST(Config, ParseReportsEveryViolation) {
  try {
    (void)dkl::parse_config("[experiment]\nname = nope\n[bogus]\n[params]\nk = -1\nzzz = 3\nx = 1, a\nnot a pair\n");
    FAIL();
  } catch (const dkl::ConfigError& e) {
    EXPECT_EQ(e.kind(), dkl::ErrorKind::config);
    EXPECT_EQ(e.violations().size(), 6U) << e.what();
  }
}

TEST(Config, ValidationErrors) {
  dkl::ExperimentConfig c;
  c.experiment = dkl::ExperimentKind::delta;
  c.k = 9;
  c.x = {0.5};
  EXPECT_EQ(dkl::validation_errors(c).size(), 2U);
  EXPECT_THROW(dkl::validate(c), dkl::ConfigError);

  dkl::ExperimentConfig s;
  s.experiment = dkl::ExperimentKind::short_interval;
  s.x = {100};
  s.h = {60};
  EXPECT_EQ(dkl::validation_errors(s).size(), 1U);
  s.h = {50};
  EXPECT_TRUE(dkl::validation_errors(s).empty());

  dkl::ExperimentConfig n;
  n.experiment = dkl::ExperimentKind::count;
  n.l = 3;
  n.n = {600};
  n.delta = {0.1};
  EXPECT_EQ(dkl::validation_errors(n).size(), 1U);

  dkl::ExperimentConfig sieve;
  EXPECT_EQ(dkl::validation_errors(sieve).size(), 1U);  // limit 0
  sieve.limit = dkl::kMaxSieveLimit + 1;
  EXPECT_EQ(dkl::validation_errors(sieve).size(), 1U);
}

TEST(Config, ExperimentNames) {
  for (const auto& [kind, name] : dkl::kExperimentNames) {
    EXPECT_EQ(dkl::to_string(kind), name);
    EXPECT_EQ(dkl::parse_experiment_kind(name), kind);
  }
  EXPECT_FALSE(dkl::parse_experiment_kind("short_interval").has_value());
}

TEST(Cache, RoundTrip) {
  const auto dir = scratch("roundtrip");
  const auto t = dkl::sieve_dk(3, 5000);
  dkl::write_table(dir / "t.dklb", t);
  const auto back = dkl::read_table(dir / "t.dklb");
  EXPECT_EQ(back.k(), 3);
  EXPECT_EQ(back.limit(), 5000U);
  for (std::uint64_t n = 1; n <= 5000; ++n) ASSERT_EQ(back[n], t[n]);
  EXPECT_EQ(fs::file_size(dir / "t.dklb"), dkl::kCacheHeaderBytes + 4 * 5000 + 8);
  fs::remove_all(dir);
}

TEST(Cache, CorruptionIsDetected) {
  const auto bytes = dkl::encode_table(dkl::sieve_dk(2, 1000));
  auto corrupt = [&](auto mutate) {
    auto b = bytes;
    mutate(b);
    return kind_of([&] { (void)dkl::decode_table(b); });
  };
  EXPECT_EQ(corrupt([](auto& b) { b.resize(10); }), dkl::ErrorKind::corruption);
  EXPECT_EQ(corrupt([](auto& b) { b.resize(b.size() - 1); }), dkl::ErrorKind::corruption);
  EXPECT_EQ(corrupt([](auto& b) { b[0] = 'X'; }), dkl::ErrorKind::corruption);
  EXPECT_EQ(corrupt([](auto& b) { b[4] = 9; }), dkl::ErrorKind::corruption);
  EXPECT_EQ(corrupt([](auto& b) { b[100] ^= 1; }), dkl::ErrorKind::corruption);
  EXPECT_EQ(corrupt([](auto& b) { b.back() ^= 0x80; }), dkl::ErrorKind::corruption);
  EXPECT_EQ(corrupt([](auto& b) { b.push_back(0); }), dkl::ErrorKind::corruption);
}

TEST(Cache, BuildsThenLoads) {
  const auto dir = scratch("build");
  const auto first = dkl::cache_table(2, 20'000, dir);
  EXPECT_TRUE(first.built);
  EXPECT_EQ(first.path, dir / "dk2_20000.dklb");
  EXPECT_FALSE(fs::exists(dir / "dk2_20000.dklb.lock"));
  const auto second = dkl::cache_table(2, 20'000, dir);
  EXPECT_FALSE(second.built);
  EXPECT_EQ(second.file_bytes, first.file_bytes);
  EXPECT_EQ(second.table->summatory(20'000), first.table->summatory(20'000));
  fs::remove_all(dir);
}

TEST(Cache, CorruptFileNeedsRebuildFlag) {
  const auto dir = scratch("corrupt");
  const auto h = dkl::cache_table(3, 4000, dir);
  {
    std::fstream f(h.path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(200);
    f.put('\x7f');
  }
  EXPECT_EQ(kind_of([&] { (void)dkl::cache_table(3, 4000, dir); }), dkl::ErrorKind::corruption);
  const auto rebuilt = dkl::cache_table(3, 4000, dir, true);
  EXPECT_TRUE(rebuilt.built);
  EXPECT_FALSE(dkl::cache_table(3, 4000, dir).built);

  // A file whose header disagrees with its name is also corrupt.
  fs::copy_file(h.path, dkl::cache_path(dir, 3, 4001));
  EXPECT_EQ(kind_of([&] { (void)dkl::cache_table(3, 4001, dir); }), dkl::ErrorKind::corruption);
  fs::remove_all(dir);
}

TEST(Cache, MissingFileIsResourceError) {
  EXPECT_EQ(kind_of([] { (void)dkl::read_table("/nonexistent/dir/x.dklb"); }), dkl::ErrorKind::resource);
}

TEST(Experiments, CsvIsByteIdenticalAcrossRuns) {
  const auto dir = scratch("determinism");
  std::vector<dkl::ExperimentConfig> configs(4);
  configs[0].experiment = dkl::ExperimentKind::voronoi;
  configs[0].x = {1e4};
  configs[0].n = {16, 64};
  configs[0].samples = 32;
  configs[1].experiment = dkl::ExperimentKind::count;
  configs[1].n = {20, 40};
  configs[1].delta_exp = {1.0, 2.0};
  configs[2].experiment = dkl::ExperimentKind::shiu;
  configs[2].x = {1e4};
  configs[2].h = {100};
  configs[2].samples = 50;
  configs[3].experiment = dkl::ExperimentKind::omega;
  configs[3].x = {5e4};
  configs[3].x_min_fit = 100;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    auto& c = configs[i];
    c.cache_dir = (dir / "cache").string();
    std::string first;
    for (int run = 0; run < 2; ++run) {
      c.out = (dir / ("run" + std::to_string(i) + "_" + std::to_string(run))).string();
      const auto paths = dkl::run_experiment(c);
      const auto csv = slurp(paths.csv);
      EXPECT_FALSE(csv.empty());
      if (run == 0) first = csv; else EXPECT_EQ(csv, first) << dkl::to_string(c.experiment);
      const auto json = nlohmann::json::parse(slurp(paths.json));
      EXPECT_EQ(json["version"], dkl::kVersion);
      EXPECT_TRUE(json.contains("timestamp"));
      EXPECT_EQ(json["experiment"], dkl::to_string(c.experiment));
      EXPECT_EQ(dkl::parse_config(json["config"].get<std::string>()), c);
    }
  }
  fs::remove_all(dir);
}

TEST(Experiments, InvalidConfigIsRejectedBeforeRunning) {
  dkl::ExperimentConfig c;
  c.experiment = dkl::ExperimentKind::moments;
  c.x = {10, 20};
  EXPECT_THROW((void)dkl::run_experiment_in_memory(c), dkl::ConfigError);
}
