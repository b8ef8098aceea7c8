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


// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// The synthetic benchmark is regenerated in a temporary directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "cagr/attention_agg.hpp"
#include "cagr/centrality_conv.hpp"
#include "cagr/evaluator.hpp"
#include "cagr/grad_check.hpp"
#include "cagr/pipeline.hpp"
#include "cagr/samplers.hpp"
#include "cagr/synth_data.hpp"
#include "test_util.hpp"

using namespace cagr;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Benchmark configuration shared by criteria 4, 5 and 7.
TrainingConfig benchmark_config(std::uint64_t seed) {
  TrainingConfig c;
  c.mode = TrainMode::kJoint;
  c.d = 32;
  c.heads = 4;
  c.negatives = 6;
  c.iterations = 200'000;
  c.neg_sampler = NoiseKind::kGroupAware;
  c.eta = 9.0;
  c.seed = seed;
  c.validate();
  return c;
}

struct Trained {
  EvalReport report;
  double seconds = 0;
  std::int64_t steps = 0;
  ModelState state;
};

Trained train_and_test(const fs::path& data_dir, const TrainingConfig& config) {
  const PreparedData data = prepare_data(data_dir, config);
  BipartiteGraph fit;
  const auto t0 = Clock::now();
  TrainResult r = train(data.training_view(config, fit), config);
  Trained out;
  out.seconds = seconds_since(t0);
  out.steps = r.group_item_steps + r.user_item_steps;
  const TrainedModel model(r.state, data, config);
  out.report = model.evaluate("test");
  out.state = std::move(r.state);
  return out;
}

std::vector<EvalReport> all_reports;

// 1 ----------------------------------------------------------------------
Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  GradCheckOptions o;
  o.d = 6;
  o.heads = 2;
  o.views = 1;
  o.eps = 1e-3;
  o.five_point = false;  // plain central differences
  const auto report = run_grad_check(o);
  const double err = report.max_error();
  const double t = seconds_since(t0);
  bool both = false, sgv = false, uv = false;
  for (const auto& e : report.entries) (e.loss == "sgv" ? sgv : uv) = true;
  both = sgv && uv;
  return {err < 1e-4 && t < 10 && both,
          fmt("max relative error %.3g over %zu parameter groups, %.2fs", err, report.entries.size(), t)};
}

// 2 ----------------------------------------------------------------------
Outcome sampler_fidelity() {
  const auto t0 = Clock::now();
  Rng rng(2026);
  auto freq = [&](int n, int draws, const std::function<int()>& draw) {
    std::vector<double> f(n, 0.0);
    for (int i = 0; i < draws; ++i) f[draw()] += 1.0;
    for (double& x : f) x /= draws;
    return f;
  };
  double worst_classic = 0, worst_group = 0, worst_coin = 0;

  const BipartiteGraph degrees(1, 2, {{0, 0, 1.0, {}}, {0, 1, 16.0, {}}});
  const AliasTable classic = classic_noise(degrees);
  const auto fc = freq(2, 1'000'000, [&] { return classic.draw(rng); });
  worst_classic = std::max(std::abs(fc[0] - 1.0 / 9), std::abs(fc[1] - 8.0 / 9));

  const BipartiteGraph uv(2, 2, {{0, 0, 1.0, {}}, {1, 0, 1.0, {}}});
  const std::vector<NodeId> members = {0, 1};
  const GroupNoise group(uv, members, 1.0);
  const auto fg = freq(2, 1'000'000, [&] { return group.draw(rng); });
  worst_group = std::max(std::abs(fg[0] - 0.695), std::abs(fg[1] - 0.305));

  for (auto [eta, expect] : {std::pair{0.0, 1.0}, {1.0, 0.5}, {3.0, 0.25}}) {
    const auto f = freq(2, 1'000'000, [&] { return choose_graph(eta, rng) == GraphChoice::kGroupItem ? 1 : 0; });
    worst_coin = std::max(worst_coin, std::abs(f[1] - expect));
  }
  const double t = seconds_since(t0);
  return {worst_classic <= 0.005 && worst_group <= 0.005 && worst_coin <= 0.01 && t < 30,
          fmt("classic dev %.4f, group-aware dev %.4f, eta-coin dev %.4f, %.2fs", worst_classic, worst_group,
              worst_coin, t)};
}

// 3 ----------------------------------------------------------------------
Outcome structural_invariants(const fs::path& data_dir) {
  const auto t0 = Clock::now();
  TrainingConfig config = benchmark_config(1);
  PreparedData data = prepare_data(data_dir, config);
  const SocialGraph& social = data.dataset.social;
  const GroupTable& groups = data.dataset.groups;
  double simplex = 0, unit = 0, perm = 0;
  std::int64_t checks = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ModelState state = init_model<float>(model_shape(social.user_count(), data.dataset.group_item.right_count(), config), seed);
    const auto d_state = cast_state<double>(state);
    const UserEncoder<double> users(d_state, social, config.views, {config.n_neighbors, config.pooling});
    const GroupEncoder<double> enc(d_state, config.attention_scale);
    for (NodeId u = 0; u < social.user_count(); ++u) {
      const auto f = users.forward(u);
      simplex = std::max({simplex, std::abs(f.alpha.sum() - 1.0), std::max(0.0, -f.alpha.minCoeff())});
      for (const auto& v : f.views) {
        if (v.norm > 0) unit = std::max(unit, std::abs(v.out.norm() - 1.0));
      }
      ++checks;
    }
    std::mt19937_64 shuffle(seed);
    for (const auto& m : groups.members) {
      MatrixR<double> x(m.size(), config.d);
      for (std::size_t i = 0; i < m.size(); ++i) x.row(i) = users.forward(m[i]).fused.transpose();
      const auto f = enc.forward(x);
      for (const auto& a : f.attention)
        for (int i = 0; i < a.rows(); ++i)
          simplex = std::max({simplex, std::abs(a.row(i).sum() - 1.0), std::max(0.0, -a.row(i).minCoeff())});
      simplex = std::max({simplex, std::abs(f.lambda.sum() - 1.0), std::max(0.0, -f.lambda.minCoeff())});
      std::vector<int> order(m.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), shuffle);
      MatrixR<double> y(m.size(), config.d);
      for (std::size_t i = 0; i < m.size(); ++i) y.row(i) = x.row(order[i]);
      const auto g = enc.forward(y);
      perm = std::max(perm, (g.group - f.group).cwiseAbs().maxCoeff());
      for (std::size_t i = 0; i < m.size(); ++i)
        perm = std::max(perm, (g.output.row(i) - f.output.row(order[i])).cwiseAbs().maxCoeff());
      ++checks;
    }
  }
  int report_failures = 0;
  for (const auto& r : all_reports) {
    try {
      r.check_invariants();
    } catch (const NumericError&) {
      ++report_failures;
    }
  }
  const double t = seconds_since(t0);
  return {simplex < 1e-6 && unit < 1e-6 && perm < 1e-6 && report_failures == 0 && t < 10,
          fmt("simplex dev %.2g, unit-norm dev %.2g, permutation dev %.2g, %d/%zu reports violate, %.2fs", simplex,
              unit, perm, report_failures, all_reports.size(), t)};
}

}  // namespace

int main() {
  testing::TempDir work("cagr-acceptance");
  const fs::path data_dir = work / "data";
  fs::create_directories(data_dir);
  SynthSpec spec;  // 2 clusters x 50 users x 40 items, p_in 0.2, p_out 0.01, 60 groups of 4
  spec.seed = 7;
  generate_synthetic(spec, data_dir);

  std::vector<std::pair<std::string, Outcome>> results(7);
  results[0] = {"gradient correctness", gradient_correctness()};
  results[1] = {"sampler fidelity", sampler_fidelity()};
  std::cerr << "criteria 1-2 done\n";

  // 4, 7: the benchmark model
  const TrainingConfig config = benchmark_config(7);
  const auto t4 = Clock::now();
  const Trained cagr = train_and_test(data_dir, config);
  const PreparedData data = prepare_data(data_dir, config);
  const ModelState untrained =
      init_model<float>(model_shape(data.dataset.user_item.left_count(), data.dataset.user_item.right_count(), config),
                        config.seed);
  const EvalReport random = TrainedModel(untrained, data, config).evaluate("test");
  const double t4s = seconds_since(t4);
  all_reports.push_back(cagr.report);
  all_reports.push_back(random);
  const double hits5 = cagr.report.hits_at(5), mrr = cagr.report.mrr;
  results[3] = {"planted recoverability",
                {hits5 >= 0.31 && mrr >= 3 * random.mrr && t4s < 300,
                 fmt("Hits@5 %.3f (need >= 0.31), MRR %.3f vs random %.3f (need >= %.3f), random Hits@5 %.3f, "
                     "%lld cases, %.1fs",
                     hits5, mrr, random.mrr, 3 * random.mrr, random.hits_at(5),
                     static_cast<long long>(cagr.report.cases), t4s)}};
  const double per_minute = 60.0 * static_cast<double>(cagr.steps) / cagr.seconds;
  results[6] = {"throughput", {per_minute >= 50'000, fmt("%.0f SGD steps/min at d=32 (need >= 50000)", per_minute)}};
  std::cerr << "criterion 4 done\n";

  // 5: ablations over three training seeds on the same benchmark
  struct Variant {
    const char* name;
    std::function<void(TrainingConfig&)> edit;
  };
  const std::vector<Variant> variants = {
      {"jt", [](TrainingConfig&) {}},
      {"tst", [](TrainingConfig& c) { c.mode = TrainMode::kTwoStage; }},
      {"st", [](TrainingConfig& c) { c.mode = TrainMode::kSimple; }},
      {"classic", [](TrainingConfig& c) { c.neg_sampler = NoiseKind::kClassicDegree; }},
      {"one-view", [](TrainingConfig& c) { c.views = {"pagerank"}; }},
      {"no-conv", [](TrainingConfig& c) {
         c.views = {};
         c.members = MemberInput::kBase;
       }},
  };
  std::map<std::string, double> hits10;
  for (const auto& v : variants) {
    for (std::uint64_t seed : {7, 8, 9}) {
      TrainingConfig c = benchmark_config(seed);
      v.edit(c);
      const EvalReport r = (seed == 7 && std::string(v.name) == "jt") ? cagr.report : train_and_test(data_dir, c).report;
      all_reports.push_back(r);
      hits10[v.name] += r.hits_at(10) / 3.0;
    }
    std::cerr << "ablation " << v.name << " done\n";
  }
  const bool a = hits10["jt"] >= hits10["tst"] && hits10["tst"] >= hits10["st"];
  const bool b = hits10["jt"] >= hits10["classic"];
  const bool c = hits10["one-view"] >= hits10["no-conv"];
  results[4] = {"ablation ordering",
                {a && b && c,
                 fmt("Hits@10 3-seed means: jt %.3f, tst %.3f, st %.3f [%s]; group-aware %.3f vs classic %.3f [%s]; "
                     "one view %.3f vs no convolution %.3f [%s]",
                     hits10["jt"], hits10["tst"], hits10["st"], a ? "ok" : "violated", hits10["jt"],
                     hits10["classic"], b ? "ok" : "violated", hits10["one-view"], hits10["no-conv"],
                     c ? "ok" : "violated")}};

  // 6: determinism and persistence
  {
    TrainingConfig small = benchmark_config(7);
    small.iterations = 20'000;
    const fs::path m1 = work / "m1", m2 = work / "m2";
    train_directory(data_dir, small, m1);
    train_directory(data_dir, small, m2);
    const bool same_files = testing::read_file(m1 / "model.bin") == testing::read_file(m2 / "model.bin");
    save_model(cagr.state, work / "cagr.bin");
    const ModelState loaded = load_model(work / "cagr.bin");
    save_model(loaded, work / "cagr2.bin");
    const bool round_trip =
        loaded == cagr.state && testing::read_file(work / "cagr.bin") == testing::read_file(work / "cagr2.bin");
    const EvalReport reloaded = TrainedModel(loaded, data, config).evaluate("test");
    const TrainedModel from_disk(m1, data_dir);
    const PreparedData small_data = prepare_data(data_dir, small);
    BipartiteGraph fit;
    const TrainResult again = train(small_data.training_view(small, fit), small);
    const EvalReport in_memory = TrainedModel(again.state, small_data, small).evaluate("test");
    const EvalReport on_disk = from_disk.evaluate("test");
    const bool same_eval = reloaded.hits == cagr.report.hits && reloaded.mrr == cagr.report.mrr &&
                           in_memory.hits == on_disk.hits && in_memory.mrr == on_disk.mrr;
    all_reports.push_back(on_disk);
    results[5] = {"determinism and persistence",
                  {same_files && round_trip && same_eval,
                   fmt("identical model files %s, save/load bit-identical %s, reloaded evaluation identical %s",
                       same_files ? "yes" : "no", round_trip ? "yes" : "no", same_eval ? "yes" : "no")}};
  }

  results[2] = {"structural invariants", structural_invariants(data_dir)};

  bool all = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [name, o] = results[i];
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << name << " — " << o.detail
              << '\n';
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
