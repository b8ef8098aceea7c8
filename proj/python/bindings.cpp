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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cagr/centrality.hpp"
#include "cagr/cli.hpp"
#include "cagr/config.hpp"
#include "cagr/errors.hpp"
#include "cagr/grad_check.hpp"
#include "cagr/pipeline.hpp"
#include "cagr/synth_data.hpp"

namespace py = pybind11;
using namespace cagr;

namespace {

TrainingConfig make_config(const std::map<std::string, std::string>& overrides) {
  TrainingConfig config;
  for (const auto& [key, value] : overrides) config.set(key, value);
  config.validate();
  return config;
}

py::dict report_dict(const EvalReport& r) {
  py::dict out;
  for (std::size_t i = 0; i < kHitCutoffs.size(); ++i) {
    out[py::str("hits@" + std::to_string(kHitCutoffs[i]))] = r.hits[i];
  }
  out["mrr"] = r.mrr;
  out["cases"] = r.cases;
  return out;
}

}  // namespace

PYBIND11_MODULE(_cagr, m) {
  m.doc() = "CAGR group recommender core";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def(
      "generate_synthetic",
      [](const std::filesystem::path& out, const std::map<std::string, double>& spec) {
        SynthSpec s;
        for (const auto& [key, value] : spec) {
          if (key == "clusters") s.clusters = static_cast<std::int32_t>(value);
          else if (key == "users_per_cluster") s.users_per_cluster = static_cast<std::int32_t>(value);
          else if (key == "items_per_cluster") s.items_per_cluster = static_cast<std::int32_t>(value);
          else if (key == "p_in") s.p_in = value;
          else if (key == "p_out") s.p_out = value;
          else if (key == "popularity_skew") s.popularity_skew = value;
          else if (key == "groups") s.groups = static_cast<std::int32_t>(value);
          else if (key == "group_size_min") s.group_size_min = static_cast<std::int32_t>(value);
          else if (key == "group_size_max") s.group_size_max = static_cast<std::int32_t>(value);
          else if (key == "group_train_items") s.group_train_items = static_cast<std::int32_t>(value);
          else if (key == "group_item_smoothing") s.group_item_smoothing = value;
          else if (key == "group_consensus") s.group_consensus = value;
          else if (key == "leader_share") s.leader_share = value;
          else if (key == "social_in") s.social_in = value;
          else if (key == "social_out") s.social_out = value;
          else if (key == "seed") s.seed = static_cast<std::uint64_t>(value);
          else throw UsageError("unknown synthetic spec key '" + key + "'");
        }
        const SynthSummary r = generate_synthetic(s, out);
        py::dict d;
        d["user_item_edges"] = r.user_item_edges;
        d["cross_cluster_edges"] = r.cross_cluster_edges;
        d["social_edges"] = r.social_edges;
        d["group_item_edges"] = r.group_item_edges;
        d["test_groups"] = r.test_groups;
        return d;
      },
      py::arg("out"), py::arg("spec") = std::map<std::string, double>{},
      "Write a synthetic dataset directory; returns edge counts.");

  m.def(
      "centrality",
      [](const std::filesystem::path& data, const std::string& measure) {
        const Dataset ds = load_dataset(DatasetPaths::in_directory(data));
        const CentralityScores c = compute_centrality(ds.social, measure, CentralityOptions{});
        std::map<std::string, double> out;
        for (std::size_t u = 0; u < c.score.size(); ++u) {
          out[ds.ids.users.name(static_cast<NodeId>(u))] = c.score[u];
        }
        return out;
      },
      py::arg("data"), py::arg("measure"), "Centrality score of every user, keyed by original id.");

  m.def(
      "train",
      [](const std::filesystem::path& data, const std::filesystem::path& out,
         const std::map<std::string, std::string>& config) {
        const TrainingConfig c = make_config(config);
        TrainSummary s;
        {
          py::gil_scoped_release release;
          s = train_directory(data, c, out);
        }
        py::dict d;
        d["group_item_steps"] = s.result.group_item_steps;
        d["user_item_steps"] = s.result.user_item_steps;
        d["seconds"] = s.seconds;
        d["final_loss"] = s.result.trace.empty() ? 0.0 : s.result.trace.back().loss;
        return d;
      },
      py::arg("data"), py::arg("out"), py::arg("config") = std::map<std::string, std::string>{},
      "Train on a dataset directory and write a model directory. `config` maps config keys to values.");

  py::class_<TrainedModel>(m, "Model")
      .def(py::init<const std::filesystem::path&, const std::filesystem::path&>(), py::arg("model"),
           py::arg("data"))
      .def(
          "evaluate",
          [](const TrainedModel& self, const std::string& split) { return report_dict(self.evaluate(split)); },
          py::arg("split") = "test")
      .def("recommend", &TrainedModel::recommend, py::arg("members"), py::arg("top_n") = 10)
      .def_property_readonly("config", [](const TrainedModel& self) { return self.config().to_text(); });

  m.def(
      "grad_check",
      [](int d, int heads, int views, std::uint64_t seed) {
        GradCheckOptions o;
        o.d = d;
        o.heads = heads;
        o.views = views;
        o.seed = seed;
        return run_grad_check(o).max_error();
      },
      py::arg("d") = 6, py::arg("heads") = 2, py::arg("views") = 1, py::arg("seed") = 3,
      "Largest relative error between analytic and finite-difference gradients.");

  m.def(
      "main",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"cagr"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command line tool in-process; returns (exit code, stdout, stderr).");
}
