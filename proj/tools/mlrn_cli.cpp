// Copyright 2026 The MLRN Authors.
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

#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "mlrn/mlrn.h"

namespace {

int report(mlrn_status s, const char* what) {
  if (s == MLRN_OK) return 0;
  std::fprintf(stderr, "mlrn: %s failed (%s): %s\n", what, mlrn_status_name(s), mlrn_last_error());
  return 1;
}

mlrn_status open_config(const std::string& path, mlrn_config** cfg) {
  return path.empty() ? mlrn_config_new(cfg) : mlrn_config_load(path.c_str(), cfg);
}

void print_epoch(const mlrn_epoch_metrics* r, void*) {
  std::printf("epoch %3llu  train acc %.4f loss %.4f  val acc %.4f loss %.4f\n",
              static_cast<unsigned long long>(r->epoch), r->training_acc, r->training_loss, r->validation_acc,
              r->validation_loss);
  std::fflush(stdout);
}

void print_seed(const mlrn_seed_run* r, void*) {
  std::printf("seed %llu  train acc %.4f  val acc %.4f\n", static_cast<unsigned long long>(r->seed), r->training_acc,
              r->validation_acc);
  std::fflush(stdout);
}

int gen_data(const std::string& config, const std::string& out, std::uint64_t count, std::uint64_t seed) {
  mlrn_config* cfg = nullptr;
  if (int rc = report(open_config(config, &cfg), "loading config")) return rc;
  mlrn_dataset* ds = nullptr;
  int rc = report(mlrn_dataset_generate(cfg, count, seed, &ds), "generating data");
  if (!rc) rc = report(mlrn_dataset_write(ds, out.c_str()), "writing dataset");
  if (!rc) std::printf("wrote %llu samples to %s\n", static_cast<unsigned long long>(count), out.c_str());
  mlrn_dataset_free(ds);
  mlrn_config_free(cfg);
  return rc;
}

int train(const std::string& config, const std::string& data, const std::string& val, const std::string& ckpt,
          const std::string& metrics, const std::string& resume) {
  mlrn_config* cfg = nullptr;
  if (int rc = report(open_config(config, &cfg), "loading config")) return rc;
  mlrn_train_options opt{};
  opt.train_path = data.c_str();
  opt.val_path = val.empty() ? nullptr : val.c_str();
  opt.checkpoint_path = ckpt.empty() ? nullptr : ckpt.c_str();
  opt.metrics_path = metrics.empty() ? nullptr : metrics.c_str();
  opt.resume_path = resume.empty() ? nullptr : resume.c_str();
  opt.on_epoch = print_epoch;
  const int rc = report(mlrn_train(cfg, &opt), "training");
  mlrn_config_free(cfg);
  return rc;
}

int eval(const std::string& ckpt, const std::string& data, const std::string& report_path) {
  mlrn_model* model = nullptr;
  mlrn_dataset* ds = nullptr;
  mlrn_report* rep = nullptr;
  char* text = nullptr;
  int rc = report(mlrn_model_load(ckpt.c_str(), &model), "loading checkpoint");
  if (!rc) rc = report(mlrn_dataset_read(data.c_str(), &ds), "reading dataset");
  if (!rc) rc = report(mlrn_evaluate(model, ds, &rep), "evaluating");
  if (!rc) rc = report(mlrn_report_format(rep, &text), "formatting report");
  if (!rc) {
    std::fputs(text, stdout);
    if (!report_path.empty()) {
      std::FILE* f = std::fopen(report_path.c_str(), "w");
      if (!f || std::fputs(text, f) < 0) {
        std::fprintf(stderr, "mlrn: cannot write report to %s\n", report_path.c_str());
        rc = 1;
      }
      if (f) std::fclose(f);
    }
  }
  mlrn_string_free(text);
  mlrn_report_free(rep);
  mlrn_dataset_free(ds);
  mlrn_model_free(model);
  return rc;
}

int gradcheck(const std::string& scale) {
  mlrn_gradcheck_result r{};
  const auto s = scale == "small" ? MLRN_GRADCHECK_SMALL : MLRN_GRADCHECK_TINY;
  if (int rc = report(mlrn_gradcheck(s, &r), "gradcheck")) return rc;
  const bool ok = r.max_relative_error < 1e-4;
  std::printf("gradcheck %s: max relative error %.3e over %llu elements (%llu kink probes skipped) %s\n",
              scale.c_str(), r.max_relative_error, static_cast<unsigned long long>(r.checked),
              static_cast<unsigned long long>(r.skipped_kinks), ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int multiseed(const std::string& config, std::size_t seeds) {
  mlrn_config* cfg = nullptr;
  if (int rc = report(open_config(config, &cfg), "loading config")) return rc;
  char* summary = nullptr;
  const int rc = report(mlrn_multiseed(cfg, seeds, print_seed, nullptr, &summary), "multiseed");
  if (!rc) std::fputs(summary, stdout);
  mlrn_string_free(summary);
  mlrn_config_free(cfg);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-layer relation networks on procedurally generated matrices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mlrn_version()));

  std::string config, out, data, val, ckpt, metrics, resume, report_path, scale = "tiny";
  std::uint64_t count = 1000, seed = 0;
  std::size_t seeds = 3;

  auto* g = app.add_subcommand("gen-data", "Generate a dataset file");
  g->add_option("--config", config, "Config file (generator.* keys)")->check(CLI::ExistingFile);
  g->add_option("--out", out, "Output dataset path")->required();
  g->add_option("--count", count, "Number of samples");
  g->add_option("--seed", seed, "Generator seed");

  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--config", config, "Config file")->check(CLI::ExistingFile);
  t->add_option("--data", data, "Training dataset")->required()->check(CLI::ExistingFile);
  t->add_option("--val", val, "Validation dataset")->check(CLI::ExistingFile);
  t->add_option("--out-checkpoint", ckpt, "Checkpoint path (written every epoch)");
  t->add_option("--out-metrics", metrics, "Metrics CSV path (written every epoch)");
  t->add_option("--resume", resume, "Checkpoint to resume from")->check(CLI::ExistingFile);

  auto* e = app.add_subcommand("eval", "Per-category evaluation of a checkpoint");
  e->add_option("--checkpoint", ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  e->add_option("--data", data, "Dataset")->required()->check(CLI::ExistingFile);
  e->add_option("--report", report_path, "Also write the report table to this file");

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check of an end-to-end model");
  gc->add_option("--scale", scale, "tiny or small")->check(CLI::IsMember({"tiny", "small"}));

  auto* m = app.add_subcommand("multiseed", "Train with several seeds and split final accuracies in two clusters");
  m->add_option("--config", config, "Config file")->check(CLI::ExistingFile);
  m->add_option("--seeds", seeds, "Number of seeds")->check(CLI::Range(2, 1000));

  CLI11_PARSE(app, argc, argv);

  if (g->parsed()) return gen_data(config, out, count, seed);
  if (t->parsed()) return train(config, data, val, ckpt, metrics, resume);
  if (e->parsed()) return eval(ckpt, data, report_path);
  if (gc->parsed()) return gradcheck(scale);
  if (m->parsed()) return multiseed(config, seeds);
  return 1;
}
