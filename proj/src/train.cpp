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

#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "blas.hpp"
#include "dataset_io.hpp"
#include "error.hpp"

namespace mlrn {

std::string format_metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  char buf[160];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MetricsRow& r = rows[i];
    require(i == 0 || r.epoch > rows[i - 1].epoch, ErrorCode::kInvalidArgument, "metrics epochs must increase");
    std::snprintf(buf, sizeof buf, "%zu;%.6f;%.6f;%.6f;%.6f\n", r.epoch, r.training_acc, r.training_loss,
                  r.validation_acc, r.validation_loss);
    out += buf;
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(std::getline(in, line) && line == kMetricsHeader, ErrorCode::kFormat, "metrics CSV header mismatch");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRow r;
    require(std::sscanf(line.c_str(), "%zu;%lf;%lf;%lf;%lf", &r.epoch, &r.training_acc, &r.training_loss,
                        &r.validation_acc, &r.validation_loss) == 5,
            ErrorCode::kFormat, "malformed metrics row '" + line + "'");
    rows.push_back(r);
  }
  return rows;
}

void emit_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  const std::string text = format_metrics_csv(rows);
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566;
constexpr std::uint64_t kDropoutStream = 0x64726f70;

struct Chunk {
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint32_t> targets;
};

Chunk gather(const std::vector<SampleRecord>& samples, const std::vector<std::size_t>& idx, std::size_t begin,
             std::size_t end) {
  Chunk c;
  const std::size_t per = samples[idx[begin]].panels.size();
  c.pixels.reserve((end - begin) * per);
  for (std::size_t i = begin; i < end; ++i) {
    const SampleRecord& s = samples[idx[i]];
    c.pixels.insert(c.pixels.end(), s.panels.begin(), s.panels.end());
    c.targets.push_back(s.target);
  }
  return c;
}

void check_dataset(const std::vector<SampleRecord>& samples, const ModelConfig& model, const std::string& what) {
  for (const SampleRecord& s : samples)
    require(s.image_size == model.image_size, ErrorCode::kShapeMismatch,
            what + " panels are " + std::to_string(s.image_size) + " px, model expects " +
                std::to_string(model.image_size));
}

[[noreturn]] void non_finite(Graph<float>& g, std::size_t epoch, std::uint64_t iteration) {
  const auto where = g.first_non_finite();
  fail(ErrorCode::kNumeric, "non-finite loss at epoch " + std::to_string(epoch) + ", iteration " +
                                std::to_string(iteration) + "; first non-finite tensor: " + where.value_or("<none>"));
}

void add_l2_grad(ModelParams<float>& params, double coefficient) {
  for (auto& [name, t] : params.entries()) {
    if (is_bias_name(name)) continue;
    if (!t.has_grad()) t.enable_grad();
    auto g = t.grad();
    auto w = t.data();
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = static_cast<float>(g[i] + 2.0 * coefficient * w[i]);
  }
}

}  // namespace

EvalResult evaluate(ModelParams<float>& params, const ModelConfig& model, const std::vector<SampleRecord>& samples,
                    std::size_t micro_batch) {
  require(micro_batch >= 1, ErrorCode::kInvalidArgument, "micro_batch must be >= 1");
  blas::configure_runtime();
  check_dataset(samples, model, "evaluation");
  EvalResult r;
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  double loss_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t b = 0; b < samples.size(); b += micro_batch) {
    const std::size_t e = std::min(samples.size(), b + micro_batch);
    Chunk c = gather(samples, idx, b, e);
    Graph<float> g;
    Binding bind = bind_params(g, params);
    Var panels = g.constant(panel_input<float>(c.pixels, (e - b) * kPanelsPerSample, model), "panels");
    ForwardResult fr = forward_batch<float>(g, bind, model, panels, e - b, nullptr);
    Var ce = g.softmax_cross_entropy(fr.scores, c.targets);
    const double l = g.value(ce)[0];
    if (!std::isfinite(l))
      fail(ErrorCode::kNumeric,
           "non-finite evaluation loss; first non-finite tensor: " + g.first_non_finite().value_or("<none>"));
    loss_sum += l * static_cast<double>(e - b);
    const auto& scores = g.value(fr.scores);
    for (std::size_t i = 0; i < e - b; ++i) {
      const std::size_t p = predict<float>(scores.data().subspan(i * kCandidates, kCandidates));
      r.predictions.push_back(p);
      r.correct.push_back(p == c.targets[i]);
      hits += p == c.targets[i] ? 1 : 0;
    }
  }
  if (!samples.empty()) {
    r.loss = loss_sum / static_cast<double>(samples.size());
    r.accuracy = static_cast<double>(hits) / static_cast<double>(samples.size());
  }
  return r;
}

CategoryReport evaluate_by_category(ModelParams<float>& params, const ModelConfig& model,
                                    const std::vector<SampleRecord>& samples, std::size_t micro_batch) {
  const EvalResult r = evaluate(params, model, samples, micro_batch);
  std::vector<std::vector<StructureTriple>> triples;
  triples.reserve(samples.size());
  for (const SampleRecord& s : samples) triples.push_back(s.triples);
  return build_category_report(triples, r.correct);
}

CategoryReport evaluate_by_category(const std::string& checkpoint_path, const std::string& dataset_path) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  return evaluate_by_category(ckpt.params, ckpt.model, read_dataset(dataset_path));
}

TrainResult train(const TrainConfig& cfg, const std::vector<SampleRecord>& train_set,
                  const std::vector<SampleRecord>& val_set, const TrainObserver& observer, const Checkpoint* resume) {
  cfg.validate();
  blas::configure_runtime();
  require(!train_set.empty(), ErrorCode::kInvalidArgument, "training set is empty");
  check_dataset(train_set, cfg.model, "training");
  check_dataset(val_set, cfg.model, "validation");
  const ModelConfig& model = cfg.model;
  const OptimizerConfig& opt = cfg.optimizer;

  TrainResult res;
  if (resume) {
    require(format_model_config(resume->model) == format_model_config(model), ErrorCode::kInvalidArgument,
            "checkpoint model differs from the configured model");
    require(resume->optimizer.has_value(), ErrorCode::kFormat, "checkpoint has no optimizer state to resume from");
    res.params = resume->params;
    res.optimizer = *resume->optimizer;
    res.epochs_done = resume->epoch;
    res.iteration = resume->iteration;
    if (!cfg.metrics_path.empty() && std::filesystem::exists(cfg.metrics_path)) {
      const auto bytes = read_file(cfg.metrics_path);
      for (const MetricsRow& r : parse_metrics_csv(std::string(bytes.begin(), bytes.end())))
        if (r.epoch <= res.epochs_done) res.metrics.push_back(r);
    }
  } else {
    res.params = init_params<float>(model, cfg.seed);
    res.optimizer = OptimizerState::create(res.params);
  }
  ModelParams<float>& params = res.params;
  for (auto& e : params.entries()) e.second.enable_grad();

  const std::size_t n = train_set.size();
  const std::size_t per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const bool use_dropout = model.dropout && dropout_mask_shape(model, 1).has_value();

  for (std::size_t epoch = res.epochs_done; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle_rng = Rng::derive(cfg.seed ^ kShuffleStream, epoch);
    shuffle_rng.shuffle(order);

    double task_sum = 0.0, act_sum = 0.0, l2_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < n; b += cfg.batch_size) {
      const std::size_t be = std::min(n, b + cfg.batch_size);
      const double batch = static_cast<double>(be - b);
      params.zero_grad();
      double task = 0.0, act = 0.0;
      std::size_t chunk_index = 0;
      for (std::size_t c0 = b; c0 < be; c0 += cfg.micro_batch, ++chunk_index) {
        const std::size_t c1 = std::min(be, c0 + cfg.micro_batch);
        const std::size_t cn = c1 - c0;
        Chunk c = gather(train_set, order, c0, c1);
        Graph<float> g;
        Binding bind = bind_params(g, params);
        Var panels = g.constant(panel_input<float>(c.pixels, cn * kPanelsPerSample, model), "panels");
        std::optional<Tensor<float>> mask;
        if (use_dropout) {
          Rng drop_rng = Rng::derive(cfg.seed ^ kDropoutStream, res.iteration, chunk_index);
          mask = make_dropout_mask<float>(*dropout_mask_shape(model, cn), model.dropout_rate, drop_rng);
        }
        ForwardResult fr = forward_batch<float>(g, bind, model, panels, cn, mask ? &*mask : nullptr);
        // Chunk terms are weighted so their sum equals the full-batch means.
        Var ce = g.scale(g.softmax_cross_entropy(fr.scores, c.targets), static_cast<float>(cn / batch));
        const double act_count =
            static_cast<double>(g.value(fr.fphi_input).size() + g.value(fr.fphi_output).size()) * batch / cn;
        Var ap = activation_penalty(g, fr.fphi_input, fr.fphi_output, opt.activation_penalty, act_count);
        Var loss = g.add(ce, ap);
        if (!std::isfinite(g.value(loss)[0])) non_finite(g, epoch, res.iteration);
        task += g.value(ce)[0];
        act += g.value(ap)[0];
        const auto& scores = g.value(fr.scores);
        for (std::size_t i = 0; i < cn; ++i)
          hits += predict<float>(scores.data().subspan(i * kCandidates, kCandidates)) == c.targets[i] ? 1 : 0;
        g.backward(loss);
      }
      double l2 = 0.0;
      if (opt.l2 > 0.0) {
        l2 = l2_penalty(params, opt.l2);
        add_l2_grad(params, opt.l2);
      }
      const double grad_norm = opt.clip_mode == ClipMode::kGlobalNorm ? clip_global_norm(params, opt.grad_clip_norm)
                                                                        : clip_per_element(params, opt.grad_clip_norm);
      StepInfo info;
      info.iteration = res.iteration;
      info.epoch = epoch;
      info.lr = warmup_lr(opt.lr, res.iteration, per_epoch, opt.warmup_epochs);
      info.grad_norm = grad_norm;
      info.task_loss = task;
      info.activation_loss = act;
      info.l2_loss = l2;
      info.params = &params;
      info.state = &res.optimizer;
      if (observer.before_step) observer.before_step(info);
      info.lamb = optimizer_step(params, res.optimizer, opt, info.lr);
      if (observer.after_step) observer.after_step(info);
      ++res.iteration;
      task_sum += task * batch;
      act_sum += act * batch;
      l2_sum += l2 * batch;
    }

    MetricsRow row;
    row.epoch = epoch + 1;
    row.task_loss = task_sum / static_cast<double>(n);
    row.activation_loss = act_sum / static_cast<double>(n);
    row.l2_loss = l2_sum / static_cast<double>(n);
    row.training_loss = row.task_loss + row.activation_loss + row.l2_loss;
    row.training_acc = static_cast<double>(hits) / static_cast<double>(n);
    if (cfg.train_accuracy == TrainAccuracy::kFull)
      row.training_acc = evaluate(params, model, train_set, cfg.micro_batch).accuracy;
    if (!val_set.empty()) {
      const EvalResult v = evaluate(params, model, val_set, cfg.micro_batch);
      row.validation_acc = v.accuracy;
      row.validation_loss = v.loss;
    }
    res.metrics.push_back(row);
    res.epochs_done = epoch + 1;
    if (!cfg.checkpoint_path.empty())
      save_checkpoint(cfg.checkpoint_path, Checkpoint{model, params, res.optimizer, res.epochs_done, res.iteration});
    if (!cfg.metrics_path.empty()) emit_metrics_csv(res.metrics, cfg.metrics_path);
    if (observer.on_epoch) observer.on_epoch(row);
    if (cfg.stop_at_val_acc > 0.0 && !val_set.empty() && row.validation_acc >= cfg.stop_at_val_acc) {
      res.stopped_early = epoch + 1 < cfg.epochs;
      break;
    }
  }
  for (auto& e : params.entries()) e.second.drop_grad();
  return res;
}

DataSplits load_or_generate(const TrainConfig& cfg) {
  DataSplits d;
  if (!cfg.train_path.empty()) {
    d.train = read_dataset(cfg.train_path);
    if (!cfg.val_path.empty()) d.val = read_dataset(cfg.val_path);
    return d;
  }
  cfg.generator.validate();
  for (std::size_t i = 0; i < cfg.train_count; ++i) d.train.push_back(generate_indexed(i, cfg.generator).record);
  for (std::size_t i = 0; i < cfg.val_count; ++i)
    d.val.push_back(generate_indexed(cfg.train_count + i, cfg.generator).record);
  return d;
}

TwoMeansSplit two_means(std::vector<double> values) {
  require(values.size() >= 2, ErrorCode::kInvalidArgument, "two-means needs at least two values");
  std::sort(values.begin(), values.end());
  auto sse = [&](std::size_t b, std::size_t e) {
    double mean = 0.0;
    for (std::size_t i = b; i < e; ++i) mean += values[i];
    mean /= static_cast<double>(e - b);
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += (values[i] - mean) * (values[i] - mean);
    return s;
  };
  std::size_t best = 1;
  double best_cost = sse(0, 1) + sse(1, values.size());
  for (std::size_t k = 2; k < values.size(); ++k) {
    const double cost = sse(0, k) + sse(k, values.size());
    if (cost < best_cost) {
      best_cost = cost;
      best = k;
    }
  }
  TwoMeansSplit s;
  s.low.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(best));
  s.high.assign(values.begin() + static_cast<std::ptrdiff_t>(best), values.end());
  s.gap = s.high.front() - s.low.back();
  return s;
}

MultiSeedSummary multi_seed_run(const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                const DataSplits& data, const std::function<void(const SeedRun&)>& on_run) {
  require(seeds.size() >= 2, ErrorCode::kInvalidArgument, "multi-seed run needs at least 2 seeds");
  MultiSeedSummary s;
  std::vector<double> finals;
  for (std::uint64_t seed : seeds) {
    TrainConfig run = cfg;
    run.seed = seed;
    run.checkpoint_path.clear();
    run.metrics_path.clear();
    const TrainResult r = train(run, data.train, data.val);
    SeedRun row{seed, r.metrics.back().training_acc, r.metrics.back().validation_acc};
    s.runs.push_back(row);
    finals.push_back(row.validation_acc);
    if (on_run) on_run(row);
  }
  s.split = two_means(finals);
  return s;
}

MultiSeedSummary multi_seed_run(const TrainConfig& cfg, std::size_t n_seeds) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(cfg.seed + i);
  return multi_seed_run(cfg, seeds, load_or_generate(cfg));
}

std::string format_multiseed(const MultiSeedSummary& s) {
  std::string out = "seed;training_acc;validation_acc;cluster\n";
  char buf[128];
  const double threshold = s.split.low.empty() ? 0.0 : s.split.low.back();
  for (const SeedRun& r : s.runs) {
    std::snprintf(buf, sizeof buf, "%llu;%.6f;%.6f;%s\n", static_cast<unsigned long long>(r.seed), r.training_acc,
                  r.validation_acc, r.validation_acc <= threshold ? "low" : "high");
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "clusters: %zu low, %zu high; gap %.6f\n", s.split.low.size(), s.split.high.size(),
                s.split.gap);
  out += buf;
  return out;
}

}  // namespace mlrn
