#include "semgan/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <map>

#include "semgan/config.hpp"
#include "semgan/errors.hpp"
#include "semgan/log.hpp"
#include "semgan/manifest.hpp"
#include "semgan/plot.hpp"
#include "semgan/weighting.hpp"

namespace semgan {

namespace fs = std::filesystem;
using json = nlohmann::json;

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUnknownFlag: return 64;
    case ErrorCategory::kInvalidConfig: return 65;
    case ErrorCategory::kConfigNotFound: return 66;
    case ErrorCategory::kMissingInput: return 67;
    case ErrorCategory::kStructural: return 68;
    case ErrorCategory::kValidation: return 69;
    case ErrorCategory::kSpecMismatch: return 70;
    case ErrorCategory::kNonFinite: return 71;
    case ErrorCategory::kCorrupt: return 72;
    case ErrorCategory::kIo: return 74;
  }
  return 1;
}

namespace {

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

void report_error(std::ostream& err, std::string_view category, const std::string& message) {
  err << "error category=" << category << " message=" << json(one_line(message)).dump()
      << "\n";
}

// Leaves of a JSON object as dotted paths; arrays are leaves.
void flatten(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& item : j.items()) {
    const std::string key = prefix.empty() ? item.key() : prefix + "." + item.key();
    if (item.value().is_object()) {
      flatten(item.value(), key, out);
    } else {
      out.push_back(key);
    }
  }
}

json::json_pointer pointer_of(const std::string& dotted) {
  std::string p = "/" + dotted;
  for (char& c : p) {
    if (c == '.') c = '/';
  }
  return json::json_pointer(p);
}

std::string flag_name(const std::string& dotted) {
  std::string s = dotted;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

// Per-field override flags generated from a section's default JSON form.
struct SectionFlags {
  std::string section;
  std::map<std::string, std::string> values;  // dotted key -> text
  std::map<std::string, CLI::Option*> options;

  // Keys in `skip` have dedicated flags.
  void add(CLI::App* app, const std::string& section_name, const json& defaults,
           const std::string& group, std::initializer_list<const char*> skip = {}) {
    section = section_name;
    std::vector<std::string> keys;
    flatten(defaults, "", keys);
    for (const auto& key : keys) {
      if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
      const json& def = defaults.at(pointer_of(key));
      auto* opt = app->add_option(flag_name(key), values[key],
                                  section_name + "." + key + " (default " + def.dump() + ")");
      opt->group(group);
      options[key] = opt;
    }
  }

  void apply(json& config) const {
    json& target = config[section];
    if (target.is_null()) target = json::object();
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) apply_override(target, key, values.at(key));
    }
  }
};

struct Common {
  std::string config_path;
  std::string run_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

fs::path resolve_run_dir(const Common& c, const std::string& command) {
  if (!c.run_dir.empty()) return c.run_dir;
  const char* root = std::getenv("SEMGAN_RUN_ROOT");
  std::string stamp = utc_timestamp();
  for (char& ch : stamp) {
    if (ch == ':') ch = '-';
  }
  return fs::path(root != nullptr && *root != '\0' ? root : "runs") / (command + "-" + stamp);
}

json base_config(const Common& c) {
  if (c.config_path.empty()) return json::object();
  json j = read_json_file(c.config_path);
  if (j.is_object() && j.contains("command") && j.contains("config")) j = j.at("config");
  if (!j.is_object()) throw Error(ErrorCategory::kInvalidConfig, "config must be an object");
  return j;
}

void require_dir(const std::string& path, const char* what) {
  if (path.empty() || !fs::exists(path)) {
    throw Error(ErrorCategory::kMissingInput,
                std::string(what) + " not found: " + (path.empty() ? "(unset)" : path));
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(sep, start);
    out.push_back(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

void write_report_files(const MetricsReport& report, const ClassCatalog& catalog,
                        const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> names;
  for (const auto& e : catalog.entries) names.push_back(e.name);
  std::ofstream(dir / "metrics.txt") << format_report(report, names);
  std::ofstream(dir / "metrics.json") << json(report).dump(2) << "\n";
  std::ofstream csv(dir / "metrics.csv");
  csv << "class,iou\n";
  for (int k = 0; k < report.num_classes; ++k) {
    csv << (k < static_cast<int>(names.size()) ? names[k] : std::to_string(k)) << ",";
    if (report.per_class_iou[k]) csv << *report.per_class_iou[k];
    csv << "\n";
  }
  csv << "miou," << report.miou << "\npixel_accuracy," << report.pixel_accuracy << "\n";
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantics-aware cycle GAN for domain adaptation: data generation, "
               "training, adaptation, segmentation and evaluation."};
  app.name("semgan");
  app.require_subcommand(1);
  app.set_version_flag("--version", "semgan " + revision());

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file or run manifest");
    sub->add_option("--run-dir", common.run_dir,
                    "Run directory (default $SEMGAN_RUN_ROOT/<command>-<time>)");
    sub->add_option("--seed", common.seed, "Seed override");
  };

  // generate-data
  auto* gen = app.add_subcommand("generate-data", "Render a toy-world source/target dataset");
  add_common(gen);
  std::string gen_out;
  gen->add_option("--out", gen_out, "Dataset root (default <run-dir>/dataset)");
  SectionFlags data_flags;
  data_flags.add(gen, "data", json(DataConfig{}), "Data overrides");

  // train-gan
  auto* tg = app.add_subcommand("train-gan", "Train the translation model");
  add_common(tg);
  std::string tg_data, tg_resume;
  tg->add_option("--data", tg_data, "Dataset root")->required();
  tg->add_option("--resume", tg_resume, "Snapshot to resume from");
  SectionFlags train_flags;
  train_flags.add(tg, "train", json(TrainConfig{}), "Training overrides", {"seed"});

  // adapt
  auto* ad = app.add_subcommand("adapt", "Translate a dataset with a trained generator");
  add_common(ad);
  std::string ad_snapshot, ad_data, ad_out, ad_direction = "s2t";
  ad->add_option("--snapshot", ad_snapshot, "GAN snapshot")->required();
  ad->add_option("--data", ad_data, "Input dataset root")->required();
  ad->add_option("--out", ad_out, "Output dataset root (default <run-dir>/adapted)");
  ad->add_option("--direction", ad_direction, "s2t or t2s")
      ->check(CLI::IsMember({"s2t", "t2s"}));

  // train-seg
  auto* ts = app.add_subcommand("train-seg", "Train a segmenter on a dataset's source split");
  add_common(ts);
  std::string ts_data;
  ts->add_option("--data", ts_data, "Dataset root")->required();
  SectionFlags seg_flags;
  seg_flags.add(ts, "segmenter", json(SegTrainConfig{}), "Segmenter overrides", {"seed"});

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluate a segmenter on held-out target labels");
  add_common(ev);
  std::string ev_seg, ev_data, ev_split = "target_eval", ev_arm;
  ev->add_option("--segmenter", ev_seg, "Segmenter snapshot")->required();
  ev->add_option("--data", ev_data, "Dataset root")->required();
  ev->add_option("--split", ev_split, "Labeled split directory under the dataset root");
  ev->add_option("--arm", ev_arm, "Arm label recorded in the report");

  // ablate
  auto* ab = app.add_subcommand("ablate", "Run the component ablation (arms a-e x seeds)");
  add_common(ab);
  std::string ab_data, ab_arms, ab_seeds;
  ab->add_option("--data", ab_data, "Toy dataset root (with target_eval)")->required();
  ab->add_option("--arms", ab_arms, "Comma-separated arms, e.g. a,e");
  ab->add_option("--seeds", ab_seeds, "Seed count N (seeds 0..N-1) or comma-separated list");
  ab->add_option("--jobs", common.jobs, "Cells run concurrently");
  SectionFlags ab_flags;
  ab_flags.add(ab, "ablation", json(AblationConfig{}), "Ablation overrides",
              {"arms", "seeds", "jobs"});

  // plot
  auto* pl = app.add_subcommand("plot", "Render loss curves and ablation bar charts");
  add_common(pl);
  std::string pl_log, pl_table;
  pl->add_option("--log", pl_log, "Training log (log.jsonl)");
  pl->add_option("--ablation", pl_table, "Ablation table (ablation.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::RequiredError& e) {
    report_error(err, category_name(ErrorCategory::kMissingInput), e.what());
    return exit_code(ErrorCategory::kMissingInput);
  } catch (const CLI::ParseError& e) {
    report_error(err, category_name(ErrorCategory::kUnknownFlag), e.what());
    return exit_code(ErrorCategory::kUnknownFlag);
  }

  try {
    json config = base_config(common);
    auto finish_run = [&](const std::string& command) {
      const RunDirectory dir = RunDirectory::create(resolve_run_dir(common, command));
      return dir;
    };

    if (*gen) {
      data_flags.apply(config);
      if (common.seed) config["data"]["scene"]["seed"] = *common.seed;
      const ConfigFile cf = parse_config(config);
      const RunDirectory dir = finish_run("generate-data");
      const fs::path root = gen_out.empty() ? dir.root / "dataset" : fs::path(gen_out);
      RunManifest m;
      m.command = "generate-data";
      m.config = json{{"data", cf.data}};
      ManifestWriter manifest(std::move(m), dir.manifest());
      const DataConfig& d = cf.data;
      const DomainStyle src = d.source_style.value_or(default_source_style(d.scene.num_classes));
      const DomainStyle tgt = d.target_style.value_or(default_target_style(d.scene.num_classes));
      generate_dataset(d.scene, src, tgt, d.n_source, d.n_target, d.n_eval, root);
      manifest.manifest().dataset_path = root.string();
      manifest.manifest().dataset_fingerprint = dataset_fingerprint(root);
      manifest.manifest().outputs["dataset"] = root.string();
      manifest.finish("complete");
      out << root.string() << "\n";
      return 0;
    }

    if (*tg) {
      train_flags.apply(config);
      if (common.seed) config["train"]["seed"] = *common.seed;
      const ConfigFile cf = parse_config(config);
      require_dir(tg_data, "dataset");
      const DomainPairDataset dataset = load_dataset(tg_data);
      TrainOptions opts;
      opts.run_dir = resolve_run_dir(common, "train-gan");
      opts.dataset_path = tg_data;
      opts.dataset_fingerprint = dataset_fingerprint(tg_data);
      if (!tg_resume.empty()) {
        if (!fs::exists(tg_resume)) {
          throw Error(ErrorCategory::kMissingInput, "snapshot not found: " + tg_resume);
        }
        opts.resume_from = fs::path(tg_resume);
      }
      opts.on_step = [&](std::int64_t step, const LossBreakdown& b) {
        if (step % cf.train.log_interval == 0) {
          char line[160];
          std::snprintf(line, sizeof line, "step %lld  L_D %.4f  L_G %.4f  rec %.4f",
                        static_cast<long long>(step), b.total_d, b.total_g, b.rec);
          log_info(line);
        }
      };
      const TrainResult r = train(cf.train, dataset, opts);
      out << (r.final_snapshot.empty() ? opts.run_dir.string() : r.final_snapshot.string())
          << "\n";
      return 0;
    }

    if (*ad) {
      if (common.seed) log_warning("--seed has no effect on adapt (inference is deterministic)");
      const RunDirectory dir = finish_run("adapt");
      const fs::path target = ad_out.empty() ? dir.root / "adapted" : fs::path(ad_out);
      require_dir(ad_data, "dataset");
      if (!fs::exists(ad_snapshot)) {
        throw Error(ErrorCategory::kMissingInput, "snapshot not found: " + ad_snapshot);
      }
      RunManifest m;
      m.command = "adapt";
      m.config = json{{"adapt", {{"snapshot", ad_snapshot}, {"direction", ad_direction}}}};
      m.dataset_path = ad_data;
      m.dataset_fingerprint = dataset_fingerprint(ad_data);
      ManifestWriter manifest(std::move(m), dir.manifest());
      adapt_dataset(ad_snapshot, ad_data, target,
                    ad_direction == "s2t" ? Direction::kSourceToTarget
                                          : Direction::kTargetToSource);
      manifest.manifest().outputs["dataset"] = target.string();
      manifest.manifest().outputs["dataset_fingerprint"] = dataset_fingerprint(target);
      manifest.finish("complete");
      out << target.string() << "\n";
      return 0;
    }

    if (*ts) {
      seg_flags.apply(config);
      if (common.seed) config["segmenter"]["seed"] = *common.seed;
      require_dir(ts_data, "dataset");
      const DomainPairDataset dataset = load_dataset(ts_data);
      // The class count always follows the dataset.
      config["segmenter"]["model"]["num_classes"] = dataset.catalog.num_classes();
      const ConfigFile cf = parse_config(config);
      const RunDirectory dir = finish_run("train-seg");
      RunManifest m;
      m.command = "train-seg";
      m.config = json{{"segmenter", cf.segmenter}};
      m.dataset_path = ts_data;
      m.dataset_fingerprint = dataset_fingerprint(ts_data);
      m.class_frequencies =
          compute_class_frequencies(dataset.source, dataset.catalog).frequencies();
      ManifestWriter manifest(std::move(m), dir.manifest());
      std::ofstream log(dir.log());
      TrainedSegmenter seg = train_segmenter(dataset.source, cf.segmenter, [&](int it, double l) {
        log << json{{"iteration", it}, {"loss", l}}.dump() << "\n";
        log.flush();
      });
      const fs::path snap = dir.snapshots() / "segmenter.snap";
      seg.save(snap, json{{"dataset", ts_data}});
      manifest.manifest().outputs["segmenter"] = snap.string();
      manifest.finish("complete");
      out << snap.string() << "\n";
      return 0;
    }

    if (*ev) {
      require_dir(ev_data, "dataset");
      if (!fs::exists(ev_seg)) {
        throw Error(ErrorCategory::kMissingInput, "segmenter not found: " + ev_seg);
      }
      const ClassCatalog catalog = load_catalog(fs::path(ev_data) / "catalog.json");
      const fs::path split = fs::path(ev_data) / ev_split;
      require_dir(split.string(), "evaluation split");
      const auto eval_set = load_labeled_dir(split, catalog);
      const RunDirectory dir = finish_run("evaluate");
      RunManifest m;
      m.command = "evaluate";
      m.config = json{{"evaluate", {{"segmenter", ev_seg}, {"split", ev_split}}}};
      m.dataset_path = ev_data;
      m.dataset_fingerprint = dataset_fingerprint(ev_data);
      ManifestWriter manifest(std::move(m), dir.manifest());
      TrainedSegmenter seg = TrainedSegmenter::load(ev_seg);
      const MetricsReport report = evaluate(seg, eval_set, ev_arm);
      write_report_files(report, catalog, dir.reports());
      manifest.manifest().outputs["report"] = (dir.reports() / "metrics.json").string();
      manifest.finish("complete");
      std::vector<std::string> names;
      for (const auto& e : catalog.entries) names.push_back(e.name);
      out << format_report(report, names);
      return 0;
    }

    if (*ab) {
      ab_flags.apply(config);
      json& abj = config["ablation"];
      if (!ab_arms.empty()) abj["arms"] = split(ab_arms, ',');
      if (!ab_seeds.empty()) {
        std::vector<std::uint64_t> seeds;
        try {
          if (ab_seeds.find(',') == std::string::npos) {
            const long long n = std::stoll(ab_seeds);
            if (n < 1) throw std::invalid_argument("count");
            for (long long s = 0; s < n; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
          } else {
            for (const auto& s : split(ab_seeds, ',')) seeds.push_back(std::stoull(s));
          }
        } catch (const std::exception&) {
          throw Error(ErrorCategory::kInvalidConfig, "--seeds: expected N or a,b,c");
        }
        abj["seeds"] = seeds;
      }
      if (common.jobs) abj["jobs"] = *common.jobs;
      if (common.seed) log_warning("--seed has no effect on ablate; use --seeds");
      require_dir(ab_data, "dataset");
      const ConfigFile cf = parse_config(config);
      const RunDirectory dir = finish_run("ablate");
      RunManifest m;
      m.command = "ablate";
      m.config = json{{"ablation", cf.ablation}};
      m.dataset_path = ab_data;
      m.dataset_fingerprint = dataset_fingerprint(ab_data);
      ManifestWriter manifest(std::move(m), dir.manifest());
      const AblationTable table = run_ablation(ab_data, cf.ablation, dir.reports());
      plot_ablation(table, dir.reports());
      manifest.manifest().outputs["table"] = (dir.reports() / "ablation.txt").string();
      manifest.finish("complete");
      out << format_ablation(table);
      return 0;
    }

    if (*pl) {
      if (pl_log.empty() && pl_table.empty()) {
        throw Error(ErrorCategory::kMissingInput, "plot needs --log and/or --ablation");
      }
      const RunDirectory dir = finish_run("plot");
      RunManifest m;
      m.command = "plot";
      m.config = json{{"plot", {{"log", pl_log}, {"ablation", pl_table}}}};
      ManifestWriter manifest(std::move(m), dir.manifest());
      if (!pl_log.empty()) plot_loss_curves(pl_log, dir.reports());
      if (!pl_table.empty()) {
        plot_ablation(ablation_from_json(read_json_file(pl_table)), dir.reports());
      }
      manifest.finish("complete");
      out << dir.reports().string() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    report_error(err, category_name(e.category()), e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace semgan
