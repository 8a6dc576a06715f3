#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "semgan/cli.hpp"
#include "support.hpp"

using namespace semgan;
using namespace semgan::testing;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliResult {
  int code = 0;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "semgan");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string last_line(const std::string& text) {
  std::string s = text;
  while (!s.empty() && s.back() == '\n') s.pop_back();
  const auto pos = s.rfind('\n');
  return pos == std::string::npos ? s : s.substr(pos + 1);
}

json tiny_config() {
  const json seg = {{"iterations", 200},  {"batch_size", 4}, {"learning_rate", 3e-3},
                    {"crop_size", 16},    {"log_interval", 50},
                    {"model", {{"base_channels", 6}, {"encoder_stages", 2}}}};
  const json gan = {{"total_steps", 200},
                    {"batch_size", 2},
                    {"crop_size", 16},
                    {"log_interval", 50},
                    {"snapshot_interval", 100},
                    {"generator",
                     {{"base_channels", 4}, {"num_residual_blocks", 1},
                      {"downsampling_stages", 1}}},
                    {"discriminator", {{"base_channels", 4}, {"encoder_stages", 1}}}};
  json small_gan = gan;
  small_gan["total_steps"] = 4;
  json small_seg = seg;
  small_seg["iterations"] = 10;
  return {{"data",
           {{"scene", {{"image_size", 16}, {"num_classes", 5}, {"seed", 31}}},
            {"n_source", 8},
            {"n_target", 8},
            {"n_eval", 4}}},
          {"train", gan},
          {"segmenter", seg},
          {"ablation",
           {{"gan", small_gan},
            {"segmenter", small_seg},
            {"oracle", small_seg},
            {"oracle_images", 8}}}};
}

fs::path write_config(const TempDir& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_CASE("cli error categories map to exit codes") {
  TempDir dir("cli");
  SUBCASE("missing config file") {
    const auto r = run({"generate-data", "--config", (dir / "missing.json").string(),
                        "--run-dir", (dir / "r").string()});
    CHECK(r.code == 66);
    CHECK(r.err.rfind("error category=config_not_found", 0) == 0);
  }
  SUBCASE("unknown flag") {
    const auto r = run({"generate-data", "--no-such-flag", "1"});
    CHECK(r.code == 64);
    CHECK(r.err.find("category=unknown_flag") != std::string::npos);
  }
  SUBCASE("invalid config value") {
    json j = tiny_config();
    j["train"]["total_steps"] = -5;
    const auto cfg = write_config(dir, j);
    const auto r = run({"train-gan", "--config", cfg.string(), "--data", dir.path().string(),
                        "--run-dir", (dir / "r").string()});
    CHECK(r.code == 65);
    CHECK(r.err.find("category=invalid_config") != std::string::npos);
  }
  SUBCASE("unknown config key") {
    json j = tiny_config();
    j["train"]["lerning_rate"] = 1.0;
    const auto cfg = write_config(dir, j);
    const auto r = run({"generate-data", "--config", cfg.string(), "--run-dir",
                        (dir / "r").string()});
    CHECK(r.code == 65);
  }
  SUBCASE("missing input") {
    const auto r = run({"train-gan", "--data", (dir / "absent").string(), "--run-dir",
                        (dir / "r").string()});
    CHECK(r.code == 67);
    CHECK(r.err.find("category=missing_input") != std::string::npos);
    CHECK(run({"adapt", "--data", dir.path().string()}).code == 67);
  }
  SUBCASE("malformed flag value") {
    const auto r = run({"generate-data", "--n-source", "many", "--run-dir",
                        (dir / "r").string()});
    CHECK(r.code == 65);
  }
}

TEST_CASE("cli pipeline chained through run directories") {
  TempDir dir("cli");
  const auto cfg = write_config(dir, tiny_config()).string();

  const auto gen = run({"generate-data", "--config", cfg, "--run-dir", (dir / "gen").string(),
                        "--n-target", "6"});
  REQUIRE(gen.code == 0);
  const fs::path data = last_line(gen.out);
  CHECK(data == dir / "gen/dataset");
  CHECK(fs::exists(data / "target_eval"));
  const json gen_manifest = read_json(dir / "gen/manifest.json");
  CHECK(gen_manifest["status"] == "complete");
  // the flag override lands in the recorded config
  CHECK(gen_manifest["config"]["data"]["n_target"] == 6);
  CHECK(gen_manifest["config"]["data"]["n_source"] == 8);

  const auto tg = run({"train-gan", "--config", cfg, "--run-dir", (dir / "gan").string(),
                       "--data", data.string(), "--seed", "5", "--weights.lambda-rec", "2.5"});
  REQUIRE(tg.code == 0);
  const fs::path snap = last_line(tg.out);
  CHECK(snap == dir / "gan/snapshots/final.snap");
  CHECK(fs::exists(dir / "gan/snapshots/step_00000100.snap"));
  const json tg_manifest = read_json(dir / "gan/manifest.json");
  CHECK(tg_manifest["config"]["train"]["seed"] == 5);
  CHECK(tg_manifest["config"]["train"]["weights"]["lambda_rec"] == 2.5);
  CHECK(tg_manifest["outputs"]["steps"] == 200);
  CHECK(tg_manifest["dataset_fingerprint"].get<std::string>().size() == 64);

  const auto ad = run({"adapt", "--run-dir", (dir / "adapt").string(), "--snapshot",
                       snap.string(), "--data", data.string()});
  REQUIRE(ad.code == 0);
  const fs::path adapted = last_line(ad.out);
  CHECK(fs::exists(adapted / "source/images"));
  for (const auto& entry : fs::directory_iterator(data / "source/labels")) {
    CHECK(read_bytes(entry.path()) ==
          read_bytes(adapted / "source/labels" / entry.path().filename()));
  }

  const auto seg = run({"train-seg", "--config", cfg, "--run-dir", (dir / "seg").string(),
                        "--data", adapted.string()});
  REQUIRE(seg.code == 0);
  const fs::path seg_snap = last_line(seg.out);
  CHECK(fs::exists(seg_snap));

  const auto ev = run({"evaluate", "--run-dir", (dir / "eval").string(), "--segmenter",
                       seg_snap.string(), "--data", data.string(), "--arm", "e"});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("mIoU") != std::string::npos);
  const json metrics = read_json(dir / "eval/reports/metrics.json");
  CHECK(metrics["miou"].get<double>() >= 0.0);
  CHECK(metrics["miou"].get<double>() <= 1.0);
  CHECK(fs::exists(dir / "eval/reports/metrics.csv"));

  // a finished run's manifest works as a config
  const auto again = run({"train-gan", "--config", (dir / "gan/manifest.json").string(),
                          "--run-dir", (dir / "gan2").string(), "--data", data.string(),
                          "--total-steps", "2"});
  CHECK(again.code == 0);
  CHECK(read_json(dir / "gan2/manifest.json")["config"]["train"]["seed"] == 5);
}

TEST_CASE("cli ablation writes the table") {
  TempDir dir("cli");
  const auto cfg = write_config(dir, tiny_config()).string();
  REQUIRE(run({"generate-data", "--config", cfg, "--out", (dir / "data").string(), "--run-dir",
               (dir / "gen").string()})
              .code == 0);
  const auto r = run({"ablate", "--config", cfg, "--run-dir", (dir / "ab").string(), "--data",
                      (dir / "data").string(), "--arms", "a,e", "--seeds", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("(a)") != std::string::npos);
  CHECK(r.out.find("(e)") != std::string::npos);
  CHECK(fs::exists(dir / "ab/reports/ablation.txt"));
  CHECK(fs::exists(dir / "ab/reports/cells/e_seed2/report.json"));
  const json m = read_json(dir / "ab/manifest.json");
  CHECK(m["config"]["ablation"]["seeds"] == json({0, 1, 2}));

  CHECK(run({"ablate", "--run-dir", (dir / "bad").string(), "--data", (dir / "data").string(),
             "--seeds", "x,y"})
            .code == 65);
}
