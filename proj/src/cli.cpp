// Copyright 2026 The CAGR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cagr/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cagr/centrality.hpp"
#include "cagr/config.hpp"
#include "cagr/errors.hpp"
#include "cagr/grad_check.hpp"
#include "cagr/manifest.hpp"
#include "cagr/pipeline.hpp"
#include "cagr/synth_data.hpp"

namespace cagr {
namespace {

namespace fs = std::filesystem;

constexpr double kGradCheckTolerance = 1e-4;

std::vector<fs::path> dataset_files(const fs::path& dir) {
  const DatasetPaths p = DatasetPaths::in_directory(dir);
  return {p.user_item, p.group_item, p.groups, p.social};
}

// Config-file keys that can also be given as flags; flags win.
struct Overrides {
  // flag name (without dashes) -> config key
  const std::vector<std::pair<std::string, std::string>> keys = {
      {"mode", "mode"},           {"d", "d"},
      {"h", "heads"},             {"M", "negatives"},
      {"N", "iterations"},        {"N1", "stage1_iterations"},
      {"N2", "stage2_iterations"}, {"eta", "eta"},
      {"gamma", "gamma"},         {"lr", "lr0"},
      {"n-neighbors", "n_neighbors"}, {"views", "views"},
      {"neg-sampler", "neg_sampler"}, {"pooling", "pooling"},
      {"members", "members"},     {"scale", "scale"},
      {"seed", "seed"},           {"workers", "workers"},
      {"check-finite", "check_finite"}, {"holdout-validation", "holdout_validation"},
  };
  std::map<std::string, std::string> values;
  std::vector<std::string> extra;  // --set key=value

  void attach(CLI::App* app) {
    for (const auto& [flag, key] : keys) {
      app->add_option("--" + flag, values[flag], "overrides config key '" + key + "'");
    }
    app->add_option("--set", extra, "any config key as key=value (repeatable)");
  }

  void apply(const CLI::App* app, TrainingConfig& config) const {
    for (const auto& [flag, key] : keys) {
      if (app->count("--" + flag) > 0) config.set(key, values.at(flag));
    }
    for (const auto& kv : extra) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
};

// Precedence: defaults < config file < CAGR_SEED < flags.
TrainingConfig resolve_config(const std::string& config_path, const CLI::App* app,
                              const Overrides& overrides) {
  TrainingConfig config;
  if (!config_path.empty()) config = TrainingConfig::load(config_path);
  if (const char* env = std::getenv("CAGR_SEED"); env != nullptr && *env != '\0') {
    config.set("seed", env);
  }
  overrides.apply(app, config);
  config.validate();
  return config;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string spec_text(const SynthSpec& s) {
  std::ostringstream o;
  o << std::setprecision(17) << "clusters = " << s.clusters << '\n'
    << "users_per_cluster = " << s.users_per_cluster << '\n'
    << "items_per_cluster = " << s.items_per_cluster << '\n'
    << "p_in = " << s.p_in << '\n'
    << "p_out = " << s.p_out << '\n'
    << "popularity_skew = " << s.popularity_skew << '\n'
    << "groups = " << s.groups << '\n'
    << "group_size_min = " << s.group_size_min << '\n'
    << "group_size_max = " << s.group_size_max << '\n'
    << "group_train_items = " << s.group_train_items << '\n'
    << "group_item_smoothing = " << s.group_item_smoothing << '\n'
    << "group_consensus = " << s.group_consensus << '\n'
    << "leader_share = " << s.leader_share << '\n'
    << "social_in = " << s.social_in << '\n'
    << "social_out = " << s.social_out << '\n'
    << "seed = " << s.seed << '\n';
  return o.str();
}

class Cli {
 public:
  Cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
      : argc_(argc), argv_(argv), out_(out), err_(err) {
    for (int i = 0; i < argc; ++i) args_.emplace_back(argv[i]);
  }

  int run() {
    CLI::App app{"CAGR group recommender", "cagr"};
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);
    app.set_version_flag("--version", "cagr 1.0.0");

    auto* gen = app.add_subcommand("gen-synth", "write a synthetic planted-cluster dataset");
    gen->add_option("--out", gen_out_, "output directory")->required();
    gen->add_option("--clusters", synth_.clusters);
    gen->add_option("--users-per-cluster", synth_.users_per_cluster);
    gen->add_option("--items-per-cluster", synth_.items_per_cluster);
    gen->add_option("--p-in", synth_.p_in);
    gen->add_option("--p-out", synth_.p_out);
    gen->add_option("--popularity-skew", synth_.popularity_skew);
    gen->add_option("--groups", synth_.groups);
    gen->add_option("--group-size-min", synth_.group_size_min);
    gen->add_option("--group-size-max", synth_.group_size_max);
    gen->add_option("--group-train-items", synth_.group_train_items);
    gen->add_option("--group-item-smoothing", synth_.group_item_smoothing);
    gen->add_option("--group-consensus", synth_.group_consensus);
    gen->add_option("--leader-share", synth_.leader_share);
    gen->add_option("--social-in", synth_.social_in);
    gen->add_option("--social-out", synth_.social_out);
    gen->add_option("--seed", synth_.seed);

    auto* cent = app.add_subcommand("centrality", "score users on the social graph");
    cent->add_option("--data", data_, "dataset directory")->required();
    cent->add_option("--out", out_dir_, "output directory")->required();
    cent->add_option("--measures", measures_, "comma-separated measures (default: all)");
    cent_overrides_.attach(cent);
    cent->add_option("--config", config_path_, "key = value config file");

    auto* train = app.add_subcommand("train", "train a model");
    train->add_option("--data", data_, "dataset directory")->required();
    train->add_option("--out", out_dir_, "model directory")->required();
    train->add_option("--config", config_path_, "key = value config file");
    train_overrides_.attach(train);

    auto* eval = app.add_subcommand("evaluate", "Hits@n and MRR on the held-out split");
    eval->add_option("--data", data_, "dataset directory")->required();
    eval->add_option("--model", model_dir_, "model directory")->required();
    eval->add_option("--out", out_dir_, "report directory (default: model directory)");
    eval->add_option("--split", split_, "test or validation")->check(CLI::IsMember({"test", "validation"}));
    eval->add_flag("--ranks", write_ranks_, "also write ranks.tsv");

    auto* rec = app.add_subcommand("recommend", "top-n items for an ad-hoc group");
    rec->add_option("--data", data_, "dataset directory")->required();
    rec->add_option("--model", model_dir_, "model directory")->required();
    rec->add_option("--members", members_, "comma-separated user ids")->required();
    rec->add_option("--topn", top_n_, "list length")->check(CLI::PositiveNumber);
    rec->add_option("--out", out_dir_, "directory for the run manifest (default: .)");

    auto* grad = app.add_subcommand("grad-check", "finite-difference gradient check");
    grad->add_option("--d", grad_.d);
    grad->add_option("--h", grad_.heads);
    grad->add_option("--views", grad_.views);
    grad->add_option("--M", grad_.negatives);
    grad->add_option("--eps", grad_.eps);
    grad->add_option("--seed", grad_.seed);
    grad->add_flag("!--two-point", grad_.five_point, "use the two-point central difference");
    grad->add_option("--out", out_dir_, "directory for the run manifest (default: .)");

    try {
      app.parse(argc_, argv_);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? kExitOk : kExitUsage;
    }

    try {
      if (gen->parsed()) return gen_synth();
      if (cent->parsed()) return centrality(cent);
      if (train->parsed()) return train_cmd(train);
      if (eval->parsed()) return evaluate_cmd();
      if (rec->parsed()) return recommend_cmd();
      if (grad->parsed()) return grad_check_cmd();
    } catch (const UsageError& e) {
      err_ << "cagr: usage error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const NumericError& e) {
      err_ << "cagr: numeric error: " << e.what() << '\n';
      return kExitNumeric;
    } catch (const DataError& e) {
      err_ << "cagr: data error: " << e.what() << '\n';
      return kExitData;
    } catch (const std::exception& e) {
      err_ << "cagr: data error: " << e.what() << '\n';
      return kExitData;
    }
    return kExitUsage;
  }

 private:
  RunManifest manifest(const std::string& command) const {
    RunManifest m;
    m.command = command;
    m.argv = args_;
    return m;
  }

  int gen_synth() {
    const SynthSummary s = generate_synthetic(synth_, gen_out_);
    RunManifest m = manifest("gen-synth");
    m.config = spec_text(synth_);
    m.seed = synth_.seed;
    m.outputs = {"user_item.tsv", "group_item.tsv", "groups.tsv", "social.tsv"};
    m.write(gen_out_);
    out_ << "user_item_edges\t" << s.user_item_edges << '\n'
         << "cross_cluster_edges\t" << s.cross_cluster_edges << '\n'
         << "social_edges\t" << s.social_edges << '\n'
         << "group_item_edges\t" << s.group_item_edges << '\n'
         << "test_groups\t" << s.test_groups << '\n';
    return kExitOk;
  }

  int centrality(const CLI::App* app) {
    const TrainingConfig config = resolve_config(config_path_, app, cent_overrides_);
    const Dataset ds = load_dataset(DatasetPaths::in_directory(data_));
    std::vector<std::string> measures = split_list(measures_);
    if (measures.empty()) measures = all_centrality_measures();

    fs::create_directories(out_dir_);
    std::ofstream tsv(fs::path(out_dir_) / "centrality.tsv");
    if (!tsv) throw DataError("cannot write centrality.tsv in " + out_dir_);
    tsv << std::setprecision(17);
    for (const auto& measure : measures) {
      const CentralityScores c = compute_centrality(ds.social, measure, config.centrality);
      for (std::size_t u = 0; u < c.score.size(); ++u) {
        tsv << ds.ids.users.name(static_cast<NodeId>(u)) << '\t' << measure << '\t' << c.score[u] << '\n';
      }
    }
    RunManifest m = manifest("centrality");
    m.config = config.to_text();
    m.seed = config.seed;
    m.inputs = dataset_files(data_);
    m.outputs = {"centrality.tsv"};
    m.write(out_dir_);
    return kExitOk;
  }

  int train_cmd(const CLI::App* app) {
    const TrainingConfig config = resolve_config(config_path_, app, train_overrides_);
    const TrainSummary summary = train_directory(data_, config, out_dir_);
    RunManifest m = manifest("train");
    m.config = config.to_text();
    m.seed = config.seed;
    m.inputs = dataset_files(data_);
    if (!config_path_.empty()) m.inputs.emplace_back(config_path_);
    m.outputs = {"model.bin", "ids.tsv", "config.txt", "loss_trace.tsv"};
    m.write(out_dir_);
    const auto& r = summary.result;
    const double steps = static_cast<double>(r.group_item_steps + r.user_item_steps);
    out_ << "steps\t" << static_cast<std::int64_t>(steps) << '\n'
         << "group_item_steps\t" << r.group_item_steps << '\n'
         << "user_item_steps\t" << r.user_item_steps << '\n'
         << "seconds\t" << summary.seconds << '\n'
         << "steps_per_minute\t" << (summary.seconds > 0 ? 60.0 * steps / summary.seconds : 0.0) << '\n';
    if (!r.trace.empty()) out_ << "final_loss\t" << r.trace.back().loss << '\n';
    return kExitOk;
  }

  int evaluate_cmd() {
    const TrainedModel model(model_dir_, data_);
    std::vector<CaseRank> ranks;
    const EvalReport report = model.evaluate(split_, write_ranks_ ? &ranks : nullptr);
    const fs::path dir = out_dir_.empty() ? fs::path(model_dir_) : fs::path(out_dir_);
    fs::create_directories(dir);
    std::ofstream(dir / "report.json") << report.to_json() << '\n';
    RunManifest m = manifest("evaluate");
    m.config = model.config().to_text();
    m.seed = model.config().seed;
    m.inputs = dataset_files(data_);
    m.inputs.push_back(fs::path(model_dir_) / "model.bin");
    m.inputs.push_back(fs::path(model_dir_) / "ids.tsv");
    m.inputs.push_back(fs::path(model_dir_) / "config.txt");
    m.outputs = {"report.json"};
    if (write_ranks_) {
      std::ofstream tsv(dir / "ranks.tsv");
      const IdMapping& ids = model.data().dataset.ids;
      tsv << "group\titem\trank\n";
      for (const CaseRank& c : ranks) {
        tsv << ids.groups.name(c.group) << '\t' << ids.items.name(c.item) << '\t' << c.rank << '\n';
      }
      m.outputs.push_back("ranks.tsv");
    }
    // evaluation must not clobber the training manifest
    m.write(dir, dir == fs::path(model_dir_) ? "evaluate_manifest.json" : "manifest.json");
    out_ << report.to_json() << '\n';
    return kExitOk;
  }

  int recommend_cmd() {
    const TrainedModel model(model_dir_, data_);
    const auto items = model.recommend(split_list(members_), top_n_);
    out_ << std::setprecision(9);
    for (const auto& [item, score] : items) out_ << item << '\t' << score << '\n';
    const fs::path dir = out_dir_.empty() ? fs::path(".") : fs::path(out_dir_);
    fs::create_directories(dir);
    RunManifest m = manifest("recommend");
    m.config = model.config().to_text();
    m.seed = model.config().seed;
    m.inputs = dataset_files(data_);
    m.inputs.push_back(fs::path(model_dir_) / "model.bin");
    m.inputs.push_back(fs::path(model_dir_) / "ids.tsv");
    m.write(dir, "recommend_manifest.json");
    return kExitOk;
  }

  int grad_check_cmd() {
    const GradCheckReport report = run_grad_check(grad_);
    out_ << std::setprecision(6) << std::scientific;
    for (const auto& e : report.entries) {
      out_ << e.loss << '\t' << e.param << '\t' << e.error << '\t' << e.max_abs_grad << '\n';
    }
    const double worst = report.max_error();
    out_ << "max_relative_error\t" << worst << '\n';
    if (!out_dir_.empty()) {
      fs::create_directories(out_dir_);
      RunManifest m = manifest("grad-check");
      m.seed = grad_.seed;
      m.write(out_dir_);
    }
    if (!(worst < kGradCheckTolerance)) {
      err_ << "cagr: numeric error: gradient check failed, max relative error " << worst << '\n';
      return kExitNumeric;
    }
    return kExitOk;
  }

  int argc_;
  const char* const* argv_;
  std::ostream& out_;
  std::ostream& err_;
  std::vector<std::string> args_;

  SynthSpec synth_;
  GradCheckOptions grad_;
  Overrides train_overrides_, cent_overrides_;
  std::string gen_out_, data_, out_dir_, model_dir_, config_path_, measures_, members_;
  std::string split_ = "test";
  bool write_ranks_ = false;
  std::size_t top_n_ = 10;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return Cli(argc, argv, out, err).run();
}

}  // namespace cagr
