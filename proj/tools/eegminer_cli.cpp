// Command-line front end: synthesize datasets, train, evaluate,
// cross-validate and export interpretation bundles.
//
// Exit codes: 0 success, 1 validation error (bad config/data), 2 runtime or
// numerical failure.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "eegminer/dataset.hpp"
#include "eegminer/eval.hpp"
#include "eegminer/serialize.hpp"
#include "eegminer/trainer.hpp"

namespace fs = std::filesystem;
using namespace eegminer;

namespace {

struct RunConfig {
  TrainConfig train;
  std::size_t folds = 10;
  std::size_t jobs = 1;
  std::size_t top_k = 10;
};

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + path.string() + ": " + e.what());
  }

  static const std::vector<std::string> known = {
      "feature_kind", "n_maps", "epochs", "batch_size", "lr0", "momentum_filters",
      "momentum_head", "gamma", "seed", "window_s", "windows_per_epoch", "oversample",
      "clamp", "folds", "jobs", "top_k"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  RunConfig cfg;
  if (j.contains("feature_kind"))
    cfg.train.feature_kind = feature_kind_from_name(j.at("feature_kind").get<std::string>());
  if (j.contains("n_maps")) cfg.train.n_maps = j.at("n_maps").get<std::size_t>();
  if (j.contains("epochs")) cfg.train.epochs = j.at("epochs").get<std::size_t>();
  if (j.contains("batch_size")) cfg.train.batch_size = j.at("batch_size").get<std::size_t>();
  if (j.contains("lr0")) cfg.train.lr0 = j.at("lr0").get<double>();
  if (j.contains("momentum_filters"))
    cfg.train.momentum_filters = j.at("momentum_filters").get<double>();
  if (j.contains("momentum_head")) cfg.train.momentum_head = j.at("momentum_head").get<double>();
  if (j.contains("gamma")) cfg.train.gamma = j.at("gamma").get<double>();
  if (j.contains("seed")) cfg.train.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("window_s") && !j.at("window_s").is_null())
    cfg.train.window_s = j.at("window_s").get<double>();
  if (j.contains("windows_per_epoch"))
    cfg.train.windows_per_epoch = j.at("windows_per_epoch").get<std::size_t>();
  if (j.contains("oversample")) cfg.train.oversample_train = j.at("oversample").get<bool>();
  if (j.contains("clamp")) {
    const json& c = j.at("clamp");
    ClampBounds b;
    b.mu_lo = c.at("mu_lo").get<double>();
    b.mu_hi = c.at("mu_hi").get<double>();
    b.h_lo = c.at("h_lo").get<double>();
    b.h_hi = c.at("h_hi").get<double>();
    cfg.train.clamp_bounds = b;
  }
  if (j.contains("folds")) cfg.folds = j.at("folds").get<std::size_t>();
  if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<std::size_t>();
  if (j.contains("top_k")) cfg.top_k = j.at("top_k").get<std::size_t>();
  cfg.train.validate();
  return cfg;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["feature_kind"] = feature_kind_name(cfg.train.feature_kind);
  j["n_maps"] = cfg.train.n_maps;
  j["epochs"] = cfg.train.epochs;
  j["batch_size"] = cfg.train.batch_size;
  j["lr0"] = cfg.train.lr0;
  j["momentum_filters"] = cfg.train.momentum_filters;
  j["momentum_head"] = cfg.train.momentum_head;
  j["gamma"] = cfg.train.gamma;
  j["seed"] = cfg.train.seed;
  if (cfg.train.window_s) j["window_s"] = *cfg.train.window_s;
  else j["window_s"] = nullptr;
  j["windows_per_epoch"] = cfg.train.windows_per_epoch;
  j["oversample"] = cfg.train.oversample_train;
  j["folds"] = cfg.folds;
  j["jobs"] = cfg.jobs;
  j["top_k"] = cfg.top_k;
  return j;
}

json checkpoint_json(const ModelState& state, const RunConfig& cfg) {
  json j = model_state_to_json(state);
  j["config"] = run_config_to_json(cfg);
  return j;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return j;
}

// Run directory layout: <out>/{checkpoints,reports,exports,logs}.
struct RunDirs {
  fs::path checkpoints, reports, exports, logs;
};

RunDirs make_run_dirs(const fs::path& out) {
  RunDirs d{out / "checkpoints", out / "reports", out / "exports", out / "logs"};
  fs::create_directories(d.checkpoints);
  fs::create_directories(d.reports);
  fs::create_directories(d.exports);
  fs::create_directories(d.logs);
  return d;
}

// Timestamps are confined to log files so every other artifact is
// byte-reproducible.
void log_line(const fs::path& log_path, const std::string& message) {
  std::ofstream log(log_path, std::ios::app);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%F %T", std::localtime(&now));
  log << "[" << stamp << "] " << message << "\n";
}

int cmd_synth(const fs::path& spec_path, const fs::path& out,
              std::optional<std::uint64_t> seed) {
  SynthSpec spec = synth_spec_from_json(read_json(spec_path));
  if (seed) spec.seed = *seed;
  const SynthResult synth = generate_synthetic(spec);
  save_synthetic(spec, synth, out);
  std::cout << "wrote " << synth.trials.size() << " trials (" << spec.n_subjects
            << " subjects, " << spec.n_channels << " channels, fs " << spec.fs << " Hz) to "
            << out.string() << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, const fs::path& data, const fs::path& out) {
  const RunDirs dirs = make_run_dirs(out);
  log_line(dirs.logs / "train.log", "loading " + data.string());
  const Dataset ds = load_dataset(data);
  log_line(dirs.logs / "train.log", "training on " + std::to_string(ds.trials.size()) + " trials");
  const TrainResult result = train(cfg.train, ds.trials);
  write_json(checkpoint_json(result.state, cfg), dirs.checkpoints / "checkpoint.json");
  write_history_csv(result.history, (dirs.reports / "history.csv").string());
  write_json(feature_index_map_to_json(result.state.kind, result.state.bank.n_channels,
                                       result.state.bank.n_maps),
             dirs.exports / "index_map.json");
  log_line(dirs.logs / "train.log", "done; final train UAR " +
                                        std::to_string(result.history.back().train_uar));
  std::cout << "checkpoint: " << (dirs.checkpoints / "checkpoint.json").string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, const fs::path& data, const fs::path& checkpoint,
             const fs::path& out) {
  const RunDirs dirs = make_run_dirs(out);
  const Dataset ds = load_dataset(data);
  const ModelState model = model_state_from_json(read_json(checkpoint));
  const EvalResult ev = evaluate(model, ds.trials, cfg.train.window_s);
  json j;
  j["uar"] = ev.val_uar;
  j["trial_probs"] = ev.trial_probs;
  j["trial_pred"] = ev.trial_pred;
  j["trial_truth"] = ev.trial_truth;
  j["trial_ids"] = ev.trial_ids;
  write_json(j, dirs.reports / "eval.json");
  std::cout << "UAR " << ev.val_uar << " over " << ev.trial_probs.size() << " trials\n";
  return 0;
}

int cmd_cv(const RunConfig& cfg, const fs::path& data, const fs::path& out) {
  const RunDirs dirs = make_run_dirs(out);
  log_line(dirs.logs / "cv.log", "loading " + data.string());
  const Dataset ds = load_dataset(data);
  log_line(dirs.logs / "cv.log",
           "cross-validating " + std::to_string(cfg.folds) + " folds, jobs " +
               std::to_string(cfg.jobs));
  const CvResult cv = cross_validate(cfg.train, ds.trials, cfg.folds, cfg.jobs);
  for (const auto& fold : cv.folds) {
    const std::string tag = std::to_string(fold.fold_index);
    write_json(fold_report_to_json(fold), dirs.reports / ("fold_" + tag + ".json"));
    write_json(checkpoint_json(fold.state, cfg), dirs.checkpoints / ("fold_" + tag + ".json"));
    write_history_csv(fold.history, (dirs.reports / ("history_" + tag + ".csv")).string());
  }
  write_json(cv_summary_to_json(cv), dirs.reports / "summary.json");
  log_line(dirs.logs / "cv.log", "done");
  std::cout << "mean val UAR " << cv.summary.mean_uar << " +- " << cv.summary.std_uar << " over "
            << cfg.folds << " folds\n";
  return 0;
}

int cmd_export(const RunConfig& cfg, const fs::path& data, const fs::path& checkpoint,
               const fs::path& out) {
  const RunDirs dirs = make_run_dirs(out);
  const Dataset ds = load_dataset(data);
  const ModelState model = model_state_from_json(read_json(checkpoint));
  const InterpretationBundle bundle = export_interpretation(model, ds.trials, cfg.top_k);
  write_json(interpretation_to_json(model, bundle), dirs.exports / "interpretation.json");
  write_json(feature_index_map_to_json(model.kind, model.bank.n_channels, model.bank.n_maps),
             dirs.exports / "index_map.json");
  write_distributions_csv(bundle, (dirs.exports / "feature_distributions.csv").string());
  const MagnitudeProfile profile = magnitude_profile_relative_change(ds.trials, 1, 0);
  write_profile_csv(profile, ds.manifest.channel_names, (dirs.exports / "profiles.csv").string());
  if (bundle.empty_topk)
    std::cout << "warning: all classifier weights are zero; top-feature list is empty\n";
  std::cout << "interpretation bundle in " << dirs.exports.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trainable generalized-Gaussian band-pass decoding pipeline"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, spec_path, checkpoint_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> folds_override, jobs_override, topk_override;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "run config JSON");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_path, "output directory")->required();
    cmd->add_option("--seed", seed_override, "override the config seed");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--spec", spec_path, "synthesis spec JSON")->required();
  synth->add_option("--out", out_path, "output directory")->required();
  synth->add_option("--seed", seed_override, "override the spec seed");

  CLI::App* train_cmd = app.add_subcommand("train", "train one model");
  add_common(train_cmd, true);
  train_cmd->add_option("--data", data_path, "dataset manifest")->required();

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval_cmd, true);
  eval_cmd->add_option("--data", data_path, "dataset manifest")->required();
  eval_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint JSON")->required();

  CLI::App* cv_cmd = app.add_subcommand("cv", "subject-held-out cross-validation");
  add_common(cv_cmd, true);
  cv_cmd->add_option("--data", data_path, "dataset manifest")->required();
  cv_cmd->add_option("--folds", folds_override, "fold count (default from config, else 10)");
  cv_cmd->add_option("--jobs", jobs_override, "parallel fold workers (default 1)");

  CLI::App* export_cmd = app.add_subcommand("export", "export the interpretation bundle");
  add_common(export_cmd, false);
  export_cmd->add_option("--data", data_path, "dataset manifest")->required();
  export_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint JSON")->required();
  export_cmd->add_option("--topk", topk_override, "top features to export (default 10)");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (seed_override) cfg.train.seed = *seed_override;
    if (folds_override) cfg.folds = *folds_override;
    if (jobs_override) cfg.jobs = *jobs_override;
    if (topk_override) cfg.top_k = *topk_override;

    if (synth->parsed()) return cmd_synth(spec_path, out_path, seed_override);
    if (train_cmd->parsed()) return cmd_train(cfg, data_path, out_path);
    if (eval_cmd->parsed()) return cmd_eval(cfg, data_path, checkpoint_path, out_path);
    if (cv_cmd->parsed()) return cmd_cv(cfg, data_path, out_path);
    if (export_cmd->parsed()) return cmd_export(cfg, data_path, checkpoint_path, out_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
