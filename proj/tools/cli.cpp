#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "manifest.hpp"
#include "rassoc/association.hpp"
#include "rassoc/core/dataset_io.hpp"
#include "rassoc/core/taskgen.hpp"
#include "rassoc/errors.hpp"
#include "rassoc/harness.hpp"
#include "rassoc/model/checkpoint.hpp"
#include "rassoc/protocol/session.hpp"
#include "rassoc/report_io.hpp"
#include "rassoc/robustness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rassoc::cli {

namespace {

struct Options {
  // shared
  std::string dataset;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string split = "dev";
  double train_fraction = 0.8;
  std::string target = "builtin";
  // gen
  std::size_t n = 2000;
  double sufficiency = 0.5;
  double label_noise = 0.0;
  // train / tables
  std::string mode = "i-or";
  std::size_t epochs = 40;
  std::size_t patience = 5;
  std::size_t batch_size = 32;
  std::size_t warmup_steps = TrainConfig{}.warmup_steps;
  double min_lr_ratio = TrainConfig{}.min_lr_ratio;
  double lr = 3e-3;
  std::string which = "both";
  // sweep / attr / serve
  std::string checkpoint;
  std::string evaluator;
  std::string sigma2_grid = "0,5,10,15,20,30,50";
  double theta_label = 0.10;
  double theta_rationale = 10.0;
  std::size_t samples = 1;
  std::size_t top_k = kDefaultTopK;
  int timeout_ms = 30000;
  // rerun
  std::string manifest;
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      grid.push_back(parse_double(item));
    } catch (const DataError&) {
      throw ConfigError("bad --sigma2-grid entry '" + item + "'");
    }
  }
  NoiseConfig cfg;
  cfg.sigma2_grid = grid;
  cfg.validate();
  return grid;
}

TrainConfig train_config(const Options& o) {
  TrainConfig tc;
  tc.seed = o.seed;
  tc.max_epochs = o.epochs;
  tc.patience = o.patience;
  tc.batch_size = o.batch_size;
  tc.learning_rate = o.lr;
  tc.warmup_steps = o.warmup_steps;
  tc.min_lr_ratio = o.min_lr_ratio;
  tc.validate();
  return tc;
}

json train_config_json(const TrainConfig& tc) {
  return json{{"epochs", tc.max_epochs},       {"patience", tc.patience},
              {"batch_size", tc.batch_size},   {"learning_rate", tc.learning_rate},
              {"clip_norm", tc.clip_norm},     {"warmup_steps", tc.warmup_steps},
              {"min_lr_ratio", tc.min_lr_ratio}, {"d_model", tc.model.d_model},
              {"d_ff", tc.model.d_ff},         {"source_embed_scale", tc.model.source_embed_scale}};
}

Dataset select_split(const Dataset& data, const Options& o) {
  if (o.split == "all") return data;
  auto [train, dev] = split_dataset(data, o.train_fraction);
  if (o.split == "train") return train;
  if (o.split == "dev") return dev;
  throw ConfigError("--split must be all, train or dev");
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string(flag) + " is required");
}

ModelParams load_trained(const std::string& path, std::optional<Mode> mode, const char* what) {
  ModelParams p = load_checkpoint(path);
  if (!p.trained) throw StateError(std::string(what) + " checkpoint is untrained: " + path);
  if (mode && p.mode != mode) {
    throw StateError(std::string(what) + " checkpoint must be a " + std::string(to_string(*mode)) +
                     " model");
  }
  return p;
}

void check_target_flag(const std::string& target) {
  if (target == "builtin") return;
  const std::string prefix = "spawn:";
  if (target.rfind(prefix, 0) == 0 && target.size() > prefix.size()) return;
  throw ConfigError("--target must be builtin or spawn:<command>");
}

std::unique_ptr<MeasurementTarget> make_target(const Options& o, std::optional<ModelParams> builtin) {
  check_target_flag(o.target);
  if (o.target == "builtin") {
    if (!builtin) throw ConfigError("--checkpoint is required with --target builtin");
    return std::make_unique<BuiltinTarget>(std::move(*builtin));
  }
  const std::string prefix = "spawn:";
  if (o.target.rfind(prefix, 0) == 0 && o.target.size() > prefix.size()) {
    auto transport = std::make_unique<protocol::ChildProcessTransport>(o.target.substr(prefix.size()));
    return std::make_unique<protocol::RemoteTarget>(
        std::move(transport), std::chrono::milliseconds(o.timeout_ms), o.target);
  }
  throw ConfigError("--target must be builtin or spawn:<command>");
}

json capabilities_json(const TargetCapabilities& c) {
  return json{{"supports_decode", c.supports_decode},
              {"supports_noise", c.supports_noise},
              {"supports_gradients", c.supports_gradients},
              {"embedding_dim", c.embedding_dim},
              {"max_len", c.max_len}};
}

// Collects outputs of one run and writes them with the manifest.
class Run {
 public:
  Run(std::string command, std::vector<std::string> args, const std::string& out_dir)
      : dir_(out_dir) {
    require(out_dir, "--out-dir");
    m_.command = std::move(command);
    m_.args = std::move(args);
    m_.started_at = utc_timestamp();
    fs::create_directories(dir_);
  }

  RunManifest& manifest() { return m_; }
  void input(const std::string& path) { m_.inputs[path] = file_digest(path); }

  void csv(const std::string& name, CsvTable table) {
    table.comments.insert(table.comments.begin(), m_.csv_comment());
    std::ofstream os(dir_ / name);
    if (!os) throw DataError("cannot write " + (dir_ / name).string());
    write_csv(os, table);
    os.close();
    record(name);
  }

  void text(const std::string& name, const std::string& content) {
    std::ofstream os(dir_ / name);
    if (!os) throw DataError("cannot write " + (dir_ / name).string());
    os << content;
    os.close();
    record(name);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }
  void record(const std::string& name) { m_.outputs[name] = file_digest(dir_ / name); }

  void finish() {
    m_.finished_at = utc_timestamp();
    save_manifest(dir_ / "manifest.json", m_);
  }

 private:
  fs::path dir_;
  RunManifest m_;
};

int cmd_gen(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  SufficiencyConfig sc;
  sc.s = o.sufficiency;
  sc.seed = o.seed;
  sc.n = o.n;
  sc.label_noise = o.label_noise;
  sc.validate();
  if (sc.n == 0) throw ConfigError("--n must be positive");
  Run run("gen", args, o.out_dir);
  run.manifest().config = json{{"n", sc.n}, {"s", sc.s}, {"label_noise", sc.label_noise}};
  run.manifest().seeds = json{{"data", sc.seed}};
  save_dataset(run.path("dataset.jsonl"), generate_dataset(sc));
  run.record("dataset.jsonl");
  run.finish();
  out << "wrote " << run.path("dataset.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_train(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  require(o.dataset, "--dataset");
  const Mode mode = parse_mode(o.mode);
  const TrainConfig tc = train_config(o);
  const Dataset data = load_dataset(o.dataset);
  auto [train_set, dev_set] = split_dataset(data, o.train_fraction);
  Run run("train", args, o.out_dir);
  run.input(o.dataset);
  json cfg = train_config_json(tc);
  cfg["mode"] = std::string(to_string(mode));
  cfg["train_fraction"] = o.train_fraction;
  run.manifest().config = cfg;
  run.manifest().seeds = json{{"train", tc.seed}};

  const TrainResult res = train(train_set, dev_set, mode, tc);
  const std::string ckpt = "model-" + std::string(to_string(mode)) + ".ckpt";
  save_checkpoint(run.path(ckpt), res.params);
  run.record(ckpt);
  CsvTable curve;
  curve.header = {"epoch", "train_loss", "dev_loss"};
  for (const auto& e : res.curve) {
    curve.rows.push_back({std::to_string(e.epoch), format_double(e.train_loss), format_double(e.dev_loss)});
  }
  run.csv("train_curve.csv", curve);
  run.text("train_summary.json",
           json{{"best_epoch", res.best_epoch}, {"dev_accuracy", res.dev_accuracy}}.dump(2) + "\n");
  run.finish();
  out << to_string(mode) << " dev accuracy " << res.dev_accuracy << '\n';
  return kExitOk;
}

int cmd_sweep(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  require(o.dataset, "--dataset");
  require(o.evaluator, "--evaluator");
  NoiseConfig nc;
  nc.sigma2_grid = parse_grid(o.sigma2_grid);
  nc.base_seed = o.seed;
  nc.samples_per_instance = o.samples;
  nc.validate();
  check_target_flag(o.target);
  const StabilityThresholds th{o.theta_label, o.theta_rationale};
  const Dataset data = select_split(load_dataset(o.dataset), o);
  std::optional<ModelParams> model;
  if (o.target == "builtin") {
    require(o.checkpoint, "--checkpoint");
    model = load_trained(o.checkpoint, Mode::i_or, "model");
  }
  const ModelParams evaluator = load_trained(o.evaluator, Mode::r_o, "evaluator");

  Run run("sweep", args, o.out_dir);
  run.input(o.dataset);
  run.input(o.evaluator);
  if (model) run.input(o.checkpoint);
  run.manifest().config = json{{"sigma2_grid", nc.sigma2_grid},
                               {"samples_per_instance", nc.samples_per_instance},
                               {"theta_label", th.label},
                               {"theta_rationale", th.rationale},
                               {"split", o.split},
                               {"train_fraction", o.train_fraction},
                               {"target", o.target}};
  run.manifest().seeds = json{{"noise_base", nc.base_seed}};

  auto target = make_target(o, std::move(model));
  const NoiseSweepReport report = sweep_and_classify(*target, evaluator, data, nc, th);
  run.csv("sweep.csv", sweep_table(report));
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"sigma2", r.sigma2}, {"parse_failures", r.parse_failures}});
  }
  run.text("sweep_summary.json",
           json{{"instances", report.instances},
                {"target", report.target},
                {"target_capabilities", capabilities_json(target->capabilities())},
                {"target_supports_noise", report.target_supports_noise},
                {"proxy_accuracy_rstar", report.proxy_accuracy_rstar},
                {"proxy_accuracy_clean", report.proxy_accuracy_clean},
                {"rows", rows}}
                   .dump(2) + "\n");
  run.finish();
  for (const auto& r : report.rows) {
    out << "sigma2=" << r.sigma2 << " accuracy=" << r.accuracy << " flip_rate=" << r.flip_rate
        << " proxy=" << r.proxy_accuracy << ' ' << to_string(r.stability) << '\n';
  }
  return kExitOk;
}

int cmd_attr(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  require(o.dataset, "--dataset");
  if (o.top_k == 0) throw ConfigError("--top-k must be positive");
  check_target_flag(o.target);
  const Dataset data = select_split(load_dataset(o.dataset), o);
  std::optional<ModelParams> model;
  if (o.target == "builtin") {
    require(o.checkpoint, "--checkpoint");
    model = load_trained(o.checkpoint, Mode::i_or, "model");
  }
  Run run("attr", args, o.out_dir);
  run.input(o.dataset);
  if (model) run.input(o.checkpoint);
  run.manifest().config = json{{"top_k", o.top_k},
                               {"split", o.split},
                               {"train_fraction", o.train_fraction},
                               {"target", o.target}};

  auto target = make_target(o, std::move(model));
  const AttributionCorpus corpus = run_attribution_corpus(*target, data, o.top_k);
  {
    std::ofstream os(run.path("attributions.jsonl"));
    if (!os) throw DataError("cannot write attributions.jsonl");
    write_corpus_jsonl(os, corpus);
  }
  run.record("attributions.jsonl");
  run.csv("association.csv", association_table(corpus.records));

  const auto& hs = corpus.summary.histograms;
  auto merged = [&](std::initializer_list<const char*> names) {
    CsvTable t;
    for (const auto& h : hs) {
      for (const char* name : names) {
        if (h.metric != name) continue;
        CsvTable one = histogram_table(h);
        t.header = one.header;
        t.rows.insert(t.rows.end(), one.rows.begin(), one.rows.end());
      }
    }
    return t;
  };
  run.csv("hist_kendall_tau.csv", merged({"kendall_tau_raw", "kendall_tau_abs"}));
  run.csv("hist_cosine.csv", merged({"cosine_raw", "cosine_abs"}));
  run.csv("hist_jsd.csv", merged({"jsd_label_uniform", "jsd_rationale_uniform"}));
  run.csv("hist_topk.csv", topk_table(corpus.summary));
  run.text("attr_summary.json",
           json{{"instances", corpus.summary.instances},
                {"parse_failures", corpus.summary.parse_failures},
                {"skipped", corpus.summary.skipped},
                {"target", target->describe()},
                {"target_capabilities", capabilities_json(target->capabilities())},
                {"means", corpus.summary.means},
                {"medians", corpus.summary.medians}}
                   .dump(2) + "\n");
  run.finish();
  out << "attributed " << corpus.records.size() << " instances (" << corpus.summary.parse_failures
      << " parse failures, " << corpus.summary.skipped << " skipped)\n";
  for (const auto& [k, v] : corpus.summary.means) out << "mean " << k << ' ' << v << '\n';
  return kExitOk;
}

int cmd_tables(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  require(o.dataset, "--dataset");
  const TrainConfig tc = train_config(o);
  std::vector<Mode> modes;
  if (o.which == "informedness" || o.which == "both") modes = {Mode::i_or, Mode::i_r, Mode::r_o};
  if (o.which == "sufficiency") modes = {Mode::r_o, Mode::ir_o};
  if (o.which == "both") modes.push_back(Mode::ir_o);
  if (modes.empty()) throw ConfigError("--which must be informedness, sufficiency or both");
  const Dataset data = load_dataset(o.dataset);

  Run run("tables", args, o.out_dir);
  run.input(o.dataset);
  json cfg = train_config_json(tc);
  cfg["which"] = o.which;
  cfg["train_fraction"] = o.train_fraction;
  run.manifest().config = cfg;
  run.manifest().seeds = json{{"train", tc.seed}};

  const ConfigSuite suite = train_suite(data, tc, modes, o.train_fraction);
  json acc = json::object();
  for (const auto& [m, a] : suite.dev_accuracy) {
    acc[std::string(to_string(m))] = a;
    const std::string ckpt = "model-" + std::string(to_string(m)) + ".ckpt";
    save_checkpoint(run.path(ckpt), suite.model(m));
    run.record(ckpt);
  }
  run.text("suite.json", json{{"dev_accuracy", acc}, {"dev_instances", suite.dev_set.size()}}.dump(2) + "\n");
  auto print = [&](const ExperimentReport& r) {
    out << r.name << '\n';
    for (const auto& row : r.rows) {
      out << "  " << row.config << ' ' << row.accuracy;
      if (row.delta) out << " (" << (*row.delta >= 0 ? "+" : "") << *row.delta << ')';
      out << '\n';
    }
  };
  if (o.which != "sufficiency") {
    const auto informed = label_informedness(suite, suite.dev_set);
    run.csv("label_informedness.csv", experiment_table(informed));
    print(informed);
  }
  if (o.which != "informedness") {
    const auto gap = sufficiency_gap(suite, suite.dev_set);
    run.csv("sufficiency_gap.csv", experiment_table(gap));
    print(gap);
  }
  run.finish();
  return kExitOk;
}

int cmd_serve(const Options& o, std::istream& in, std::ostream& out) {
  require(o.checkpoint, "--checkpoint");
  BuiltinTarget target(load_trained(o.checkpoint, std::nullopt, "served"));
  protocol::ProtocolServer server(target);
  server.serve(in, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"Label-rationale association toolkit", "rassoc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolkitVersion);

  auto add_out = [&](CLI::App* c) { c->add_option("--out-dir", o.out_dir, "Output directory")->required(); };
  auto add_split = [&](CLI::App* c) {
    c->add_option("--split", o.split, "Dataset part: all, train or dev")->capture_default_str();
    c->add_option("--train-fraction", o.train_fraction, "Train share of the split")->capture_default_str();
  };
  auto add_train = [&](CLI::App* c) {
    c->add_option("--epochs", o.epochs, "Maximum epochs")->capture_default_str();
    c->add_option("--patience", o.patience, "Early-stopping patience")->capture_default_str();
    c->add_option("--batch-size", o.batch_size, "Minibatch size")->capture_default_str();
    c->add_option("--lr", o.lr, "Learning rate")->capture_default_str();
    c->add_option("--warmup-steps", o.warmup_steps, "Linear warmup steps")->capture_default_str();
    c->add_option("--min-lr-ratio", o.min_lr_ratio, "Final learning rate as a share of --lr")->capture_default_str();
    c->add_option("--train-fraction", o.train_fraction, "Train share of the dataset")->capture_default_str();
  };
  auto add_target = [&](CLI::App* c) {
    c->add_option("--target", o.target, "builtin or spawn:<command>")->capture_default_str();
    c->add_option("--checkpoint", o.checkpoint, "I->OR checkpoint (builtin target)");
    c->add_option("--timeout-ms", o.timeout_ms, "Remote reply timeout")->capture_default_str();
  };

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  gen->add_option("--n", o.n, "Number of instances")->capture_default_str();
  gen->add_option("--sufficiency", o.sufficiency, "Fraction of sufficient rationales")->capture_default_str();
  gen->add_option("--label-noise", o.label_noise, "Fraction of swapped gold labels")->capture_default_str();
  add_out(gen);

  auto* tr = app.add_subcommand("train", "Train one model configuration");
  tr->add_option("--dataset", o.dataset, "Dataset JSONL")->required();
  tr->add_option("--mode", o.mode, "i-or, i-r, r-o or ir-o")->capture_default_str();
  tr->add_option("--seed", o.seed, "Training seed")->capture_default_str();
  add_train(tr);
  add_out(tr);

  auto* sw = app.add_subcommand("sweep", "Noise robustness sweep");
  sw->add_option("--dataset", o.dataset, "Dataset JSONL")->required();
  sw->add_option("--evaluator", o.evaluator, "Frozen R->O checkpoint")->required();
  sw->add_option("--seed", o.seed, "Base noise seed")->capture_default_str();
  sw->add_option("--sigma2-grid", o.sigma2_grid, "Comma-separated sigma^2 values")->capture_default_str();
  sw->add_option("--theta-label", o.theta_label, "Max flip rate of a stable label")->capture_default_str();
  sw->add_option("--theta-rationale", o.theta_rationale, "Max proxy drop (points) of a stable rationale")
      ->capture_default_str();
  sw->add_option("--samples", o.samples, "Noise samples per instance")->capture_default_str();
  add_target(sw);
  add_split(sw);
  add_out(sw);

  auto* at = app.add_subcommand("attr", "Label/rationale attribution comparison");
  at->add_option("--dataset", o.dataset, "Dataset JSONL")->required();
  at->add_option("--seed", o.seed, "Unused; recorded in the manifest")->capture_default_str();
  at->add_option("--top-k", o.top_k, "k of the top-k overlap")->capture_default_str();
  add_target(at);
  add_split(at);
  add_out(at);

  auto* tb = app.add_subcommand("tables", "Label-informedness and sufficiency-gap experiments");
  tb->add_option("--dataset", o.dataset, "Dataset JSONL")->required();
  tb->add_option("--seed", o.seed, "Training seed")->capture_default_str();
  tb->add_option("--which", o.which, "informedness, sufficiency or both")->capture_default_str();
  add_train(tb);
  add_out(tb);

  auto* sv = app.add_subcommand("serve", "Serve a checkpoint over the wire protocol on stdin/stdout");
  sv->add_option("--checkpoint", o.checkpoint, "Checkpoint to serve")->required();

  auto* rr = app.add_subcommand("rerun", "Rerun the command recorded in a manifest");
  rr->add_option("--manifest", o.manifest, "manifest.json")->required();
  rr->add_option("--out-dir", o.out_dir, "Override the recorded output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolkitVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(o, args, out);
    if (*tr) return cmd_train(o, args, out);
    if (*sw) return cmd_sweep(o, args, out);
    if (*at) return cmd_attr(o, args, out);
    if (*tb) return cmd_tables(o, args, out);
    if (*sv) return cmd_serve(o, in, out);
    if (*rr) {
      const RunManifest m = load_manifest(o.manifest);
      std::vector<std::string> again = m.args;
      if (!o.out_dir.empty()) {
        bool replaced = false;
        for (std::size_t i = 0; i + 1 < again.size(); ++i) {
          if (again[i] == "--out-dir") {
            again[i + 1] = o.out_dir;
            replaced = true;
          }
        }
        if (!replaced) {
          again.push_back("--out-dir");
          again.push_back(o.out_dir);
        }
      }
      if (!again.empty() && again.front() == "rerun") throw DataError("manifest records a rerun");
      return run(again, in, out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace rassoc::cli
