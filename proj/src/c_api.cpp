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

#include "mlrn/mlrn.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <functional>
#include <memory>
#include <new>
#include <string>

#include "checkpoint.hpp"
#include "config.hpp"
#include "dataset_io.hpp"
#include "error.hpp"
#include "model_gradcheck.hpp"
#include "train.hpp"

struct mlrn_config {
  mlrn::TrainConfig cfg;
};

struct mlrn_dataset {
  std::vector<mlrn::SampleRecord> samples;
  std::size_t image_size = 0;
};

struct mlrn_model {
  mlrn::Checkpoint ckpt;
};

struct mlrn_report {
  mlrn::CategoryReport report;
  std::vector<std::pair<std::string, double>> rows;
};

namespace {

thread_local std::string g_last_error;

mlrn_status to_status(mlrn::ErrorCode code) {
  switch (code) {
    case mlrn::ErrorCode::kInvalidArgument: return MLRN_ERR_INVALID_ARGUMENT;
    case mlrn::ErrorCode::kShapeMismatch: return MLRN_ERR_SHAPE;
    case mlrn::ErrorCode::kIo: return MLRN_ERR_IO;
    case mlrn::ErrorCode::kFormat: return MLRN_ERR_FORMAT;
    case mlrn::ErrorCode::kNumeric: return MLRN_ERR_NUMERIC;
    case mlrn::ErrorCode::kState: return MLRN_ERR_STATE;
    case mlrn::ErrorCode::kDomain: return MLRN_ERR_DOMAIN;
  }
  return MLRN_ERR_INTERNAL;
}

template <typename F>
mlrn_status guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return MLRN_OK;
  } catch (const mlrn::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MLRN_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MLRN_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  mlrn::require(p != nullptr, mlrn::ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* mlrn_last_error(void) { return g_last_error.c_str(); }

const char* mlrn_status_name(mlrn_status status) {
  switch (status) {
    case MLRN_OK: return "ok";
    case MLRN_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MLRN_ERR_SHAPE: return "shape mismatch";
    case MLRN_ERR_IO: return "i/o error";
    case MLRN_ERR_FORMAT: return "format error";
    case MLRN_ERR_NUMERIC: return "numeric error";
    case MLRN_ERR_STATE: return "invalid state";
    case MLRN_ERR_DOMAIN: return "domain error";
    case MLRN_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mlrn_version(void) { return "0.1.0"; }

void mlrn_string_free(char* s) { std::free(s); }

mlrn_status mlrn_config_new(mlrn_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new mlrn_config();
  });
}

mlrn_status mlrn_config_load(const char* path, mlrn_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    auto c = std::make_unique<mlrn_config>();
    c->cfg = mlrn::load_config(path);
    *out = c.release();
  });
}

mlrn_status mlrn_config_parse(const char* text, mlrn_config** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    auto c = std::make_unique<mlrn_config>();
    c->cfg = mlrn::parse_config(text);
    *out = c.release();
  });
}

mlrn_status mlrn_config_set(mlrn_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    mlrn::TrainConfig next = cfg->cfg;
    mlrn::set_config_value(next, key, value);
    cfg->cfg = std::move(next);
  });
}

mlrn_status mlrn_config_format(const mlrn_config* cfg, char** out_text) {
  return guard([&] {
    need(cfg, "config");
    need(out_text, "out_text");
    *out_text = dup_string(mlrn::format_config(cfg->cfg));
  });
}

void mlrn_config_free(mlrn_config* cfg) { delete cfg; }

mlrn_status mlrn_dataset_generate(const mlrn_config* cfg, uint64_t count, uint64_t seed, mlrn_dataset** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    mlrn::GeneratorConfig gen = cfg->cfg.generator;
    gen.seed = seed;
    auto ds = std::make_unique<mlrn_dataset>();
    ds->samples = mlrn::generate_dataset(count, gen);
    ds->image_size = gen.image_size;
    *out = ds.release();
  });
}

mlrn_status mlrn_dataset_read(const char* path, mlrn_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    auto ds = std::make_unique<mlrn_dataset>();
    ds->samples = mlrn::read_dataset(path);
    if (!ds->samples.empty()) ds->image_size = ds->samples.front().image_size;
    *out = ds.release();
  });
}

mlrn_status mlrn_dataset_write(const mlrn_dataset* ds, const char* path) {
  return guard([&] {
    need(ds, "dataset");
    need(path, "path");
    mlrn::write_dataset(ds->samples, path, ds->image_size);
  });
}

size_t mlrn_dataset_size(const mlrn_dataset* ds) { return ds ? ds->samples.size() : 0; }

size_t mlrn_dataset_image_size(const mlrn_dataset* ds) { return ds ? ds->image_size : 0; }

mlrn_status mlrn_dataset_target(const mlrn_dataset* ds, size_t index, uint8_t* out) {
  return guard([&] {
    need(ds, "dataset");
    need(out, "out");
    mlrn::require(index < ds->samples.size(), mlrn::ErrorCode::kInvalidArgument, "sample index out of range");
    *out = ds->samples[index].target;
  });
}

mlrn_status mlrn_dataset_panels(const mlrn_dataset* ds, size_t index, uint8_t* out, size_t out_len) {
  return guard([&] {
    need(ds, "dataset");
    need(out, "out");
    mlrn::require(index < ds->samples.size(), mlrn::ErrorCode::kInvalidArgument, "sample index out of range");
    const auto& p = ds->samples[index].panels;
    mlrn::require(out_len >= p.size(), mlrn::ErrorCode::kInvalidArgument,
                  "output buffer needs " + std::to_string(p.size()) + " bytes");
    std::memcpy(out, p.data(), p.size());
  });
}

void mlrn_dataset_free(mlrn_dataset* ds) { delete ds; }

mlrn_status mlrn_train(const mlrn_config* cfg, const mlrn_train_options* options) {
  return guard([&] {
    need(cfg, "config");
    need(options, "options");
    need(options->train_path, "train_path");
    mlrn::TrainConfig tc = cfg->cfg;
    tc.train_path = options->train_path;
    tc.val_path = options->val_path ? options->val_path : "";
    tc.checkpoint_path = options->checkpoint_path ? options->checkpoint_path : "";
    tc.metrics_path = options->metrics_path ? options->metrics_path : "";
    tc.validate();
    const mlrn::DataSplits data = mlrn::load_or_generate(tc);
    std::optional<mlrn::Checkpoint> resume;
    if (options->resume_path) resume = mlrn::load_checkpoint(options->resume_path);
    mlrn::TrainObserver obs;
    if (options->on_epoch) {
      obs.on_epoch = [&](const mlrn::MetricsRow& r) {
        const mlrn_epoch_metrics m{r.epoch, r.training_acc, r.training_loss, r.validation_acc, r.validation_loss};
        options->on_epoch(&m, options->user);
      };
    }
    mlrn::train(tc, data.train, data.val, obs, resume ? &*resume : nullptr);
  });
}

mlrn_status mlrn_model_load(const char* checkpoint_path, mlrn_model** out) {
  return guard([&] {
    need(checkpoint_path, "checkpoint_path");
    need(out, "out");
    auto m = std::make_unique<mlrn_model>();
    m->ckpt = mlrn::load_checkpoint(checkpoint_path);
    *out = m.release();
  });
}

size_t mlrn_model_parameter_count(const mlrn_model* model) { return model ? model->ckpt.params.parameter_count() : 0; }

mlrn_status mlrn_model_scores(mlrn_model* model, const mlrn_dataset* ds, size_t index, float scores[8]) {
  return guard([&] {
    need(model, "model");
    need(ds, "dataset");
    need(scores, "scores");
    mlrn::require(index < ds->samples.size(), mlrn::ErrorCode::kInvalidArgument, "sample index out of range");
    const mlrn::Tensor<float> s = mlrn::wren_forward(ds->samples[index], model->ckpt.params, model->ckpt.model);
    std::memcpy(scores, s.data().data(), 8 * sizeof(float));
  });
}

void mlrn_model_free(mlrn_model* model) { delete model; }

mlrn_status mlrn_evaluate(mlrn_model* model, const mlrn_dataset* ds, mlrn_report** out) {
  return guard([&] {
    need(model, "model");
    need(ds, "dataset");
    need(out, "out");
    auto r = std::make_unique<mlrn_report>();
    r->report = mlrn::evaluate_by_category(model->ckpt.params, model->ckpt.model, ds->samples);
    for (const auto& row : r->report.categories) r->rows.emplace_back(row.name, row.accuracy());
    if (r->report.all_single) r->rows.emplace_back(r->report.all_single->name, r->report.all_single->accuracy());
    r->rows.emplace_back("Total acc", r->report.total_acc());
    r->rows.emplace_back("Total error", r->report.total_error());
    *out = r.release();
  });
}

size_t mlrn_report_row_count(const mlrn_report* report) { return report ? report->rows.size() : 0; }

mlrn_status mlrn_report_row(const mlrn_report* report, size_t index, const char** name, double* value) {
  return guard([&] {
    need(report, "report");
    mlrn::require(index < report->rows.size(), mlrn::ErrorCode::kInvalidArgument, "report row out of range");
    if (name) *name = report->rows[index].first.c_str();
    if (value) *value = report->rows[index].second;
  });
}

double mlrn_report_total_acc(const mlrn_report* report) { return report ? report->report.total_acc() : 0.0; }

mlrn_status mlrn_report_format(const mlrn_report* report, char** out_text) {
  return guard([&] {
    need(report, "report");
    need(out_text, "out_text");
    *out_text = dup_string(mlrn::format_report(report->report));
  });
}

void mlrn_report_free(mlrn_report* report) { delete report; }

mlrn_status mlrn_gradcheck(mlrn_gradcheck_scale scale, mlrn_gradcheck_result* out) {
  return guard([&] {
    need(out, "out");
    mlrn::require(scale == MLRN_GRADCHECK_TINY || scale == MLRN_GRADCHECK_SMALL, mlrn::ErrorCode::kInvalidArgument,
                  "unknown gradcheck scale");
    const auto r = mlrn::model_grad_check(scale == MLRN_GRADCHECK_TINY ? mlrn::GradCheckScale::kTiny
                                                                       : mlrn::GradCheckScale::kSmall);
    *out = mlrn_gradcheck_result{r.max_relative_error, r.checked, r.skipped_kinks};
  });
}

mlrn_status mlrn_multiseed(const mlrn_config* cfg, size_t n_seeds, mlrn_seed_callback on_run, void* user,
                           char** out_summary) {
  return guard([&] {
    need(cfg, "config");
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(cfg->cfg.seed + i);
    std::function<void(const mlrn::SeedRun&)> cb;
    if (on_run)
      cb = [&](const mlrn::SeedRun& r) {
        const mlrn_seed_run run{r.seed, r.training_acc, r.validation_acc};
        on_run(&run, user);
      };
    const auto summary = mlrn::multi_seed_run(cfg->cfg, seeds, mlrn::load_or_generate(cfg->cfg), cb);
    if (out_summary) *out_summary = dup_string(mlrn::format_multiseed(summary));
  });
}

}  // extern "C"
