#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "projlab/commands.hpp"

using namespace projlab;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("projlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Config, DefaultsRoundTripThroughJson) {
  const RunConfig c;
  EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))), config_to_json(c));
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(config_from_json(Json::parse(R"({"scene": {"colour": 1}})")), Error);
  EXPECT_THROW(config_from_json(Json::parse(R"({"bogus": 1})")), Error);
}

TEST(Config, TypeErrorsRejected) {
  EXPECT_THROW(config_from_json(Json::parse(R"({"seed": "x"})")), Error);
  EXPECT_THROW(config_from_json(Json::parse(R"({"scene": {"object": "truck"}})")), Error);
  EXPECT_THROW(config_from_json(Json::parse(R"({"scene": {"distance_m": -1}})")), Error);
}

TEST(Config, IncludeMergesWithOverride) {
  const auto dir = scratch("include");
  std::filesystem::create_directories(dir / "shared");
  write(dir / "shared" / "base.json", R"({"scene": {"ambient_lux": 200, "projector_lumens": 3000}, "seed": 5})");
  write(dir / "run.json", R"({"include": "shared/base.json", "scene": {"ambient_lux": 400}})");
  const RunConfig c = load_config((dir / "run.json").string());
  EXPECT_EQ(c.scene.ambient_lux, 400);
  EXPECT_EQ(c.scene.projector_lumens, 3000);
  EXPECT_EQ(c.seed, 5u);
}

TEST(Config, IncludeCycleRejected) {
  const auto dir = scratch("cycle");
  write(dir / "a.json", R"({"include": "b.json"})");
  write(dir / "b.json", R"({"include": "a.json"})");
  EXPECT_THROW(load_config((dir / "a.json").string()), Error);
}

TEST(Config, MissingFileIsConfigError) {
  try {
    load_config("/nonexistent/projlab.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}

TEST(Config, TransferNeedsTwoDetectors) {
  EXPECT_THROW(config_from_json(Json::parse(R"({"transfer": {"detectors": ["template"]}})")), Error);
}

TEST(Csv, QuotingAndLineEndings) {
  CsvWriter w({"a", "b"});
  w.row({"plain", "with,comma"});
  w.row({"quote\"d", "line\nbreak"});
  EXPECT_EQ(w.str(), "a,b\r\nplain,\"with,comma\"\r\n\"quote\"\"d\",\"line\nbreak\"\r\n");
  EXPECT_THROW(w.row({"x"}), Error);
}

TEST(Numbers, ShortestRoundTrip) {
  RngStream rng(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(20)) - 10);
    ASSERT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(std::optional<double>{}, "-"), "-");
}

TEST(Json, KeysAreSorted) {
  const std::string s = json_text(Json{{"b", 1}, {"a", 2}});
  EXPECT_LT(s.find("\"a\""), s.find("\"b\""));
}

TEST(Container, RoundTripAndCorruption) {
  Container c;
  c.kind = "test";
  c.put("m", {1, 2, 3, 4, 5, 6}, {2, 3});
  c.put_scalar("s", -0.25);
  c.put_text("t", "hello");
  const std::string bytes = encode_container(c);
  const Container d = decode_container(bytes);
  EXPECT_EQ(d.kind, "test");
  EXPECT_EQ(d.array("m").dims, (std::vector<std::uint32_t>{2, 3}));
  EXPECT_EQ(d.array("m").values[5], 6.0);
  EXPECT_EQ(d.scalar("s"), -0.25);
  EXPECT_EQ(d.text("t"), "hello");
  EXPECT_THROW(decode_container(bytes.substr(0, bytes.size() - 3)), Error);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_container(bad), Error);
  EXPECT_THROW(c.put("x", {1, 2}, {3}), Error);
}

TEST(Norms, NoRecordsGiveZeroRows) {
  const auto rows = run_norms_comparison({});
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.count, 0u);
    EXPECT_EQ(r.l2, 0.0);
    EXPECT_EQ(r.linf, 0.0);
    EXPECT_EQ(r.l0_pct, 0.0);
  }
}

TEST(Transfer, DashCellsExcludedFromAverage) {
  TransferConfig cfg;
  cfg.methods = {AttackMethod::DPatchLike};
  cfg.scenarios = {Scenario::PlPa};
  std::vector<TransferCell> cells(3);
  for (auto& c : cells) c.method = AttackMethod::DPatchLike, c.scenario = Scenario::PlPa;
  cells[0].conf_diff_pct = 40;
  cells[1].conf_diff_pct = 20;
  const auto avg = transfer_averages(cells, cfg);
  ASSERT_EQ(avg.size(), 1u);
  EXPECT_DOUBLE_EQ(avg[0].mean_conf_diff_pct, 30.0);
  EXPECT_EQ(avg[0].excluded, 1u);
  EXPECT_NE(transfer_cells_csv(cells).find(",-\r\n"), std::string::npos);
}

TEST(Transfer, OneDetectorRejected) {
  EXPECT_THROW(run_transfer_matrix({}, {{"template", nullptr}}), Error);
}
