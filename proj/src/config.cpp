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

#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "error.hpp"

namespace mlrn {

ModelConfig TrainConfig::micro_model() {
  ModelConfig m;
  m.relation_layers = 2;
  m.image_size = 32;
  m.conv_count = 2;
  m.conv_channels = 16;
  m.projection_dim = 55;
  m.layer1_widths = {64, 64, 64};
  m.deeper_widths = {64, 64};
  m.f_phi_widths = {64, 64, 1};
  m.me = MEConfig{8, 0.28, EncodingVariant::kGaussian};
  return m;
}

void TrainConfig::validate() const {
  model.validate();
  optimizer.validate();
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "train.batch_size must be >= 1");
  require(micro_batch >= 1, ErrorCode::kInvalidArgument, "train.micro_batch must be >= 1");
  require(epochs >= 1, ErrorCode::kInvalidArgument, "train.epochs must be >= 1");
  const std::string* paths[] = {&train_path, &val_path, &checkpoint_path, &metrics_path};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      require(paths[i]->empty() || *paths[i] != *paths[j], ErrorCode::kInvalidArgument,
              "train paths must be distinct ('" + *paths[i] + "' repeats)");
  if (train_path.empty())
    require(generator.image_size == model.image_size, ErrorCode::kInvalidArgument,
            "generator.image_size (" + std::to_string(generator.image_size) + ") differs from model.image_size (" +
                std::to_string(model.image_size) + ")");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& want) {
  fail(ErrorCode::kInvalidArgument, "config key '" + key + "': '" + value + "' is not " + want);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::size_t> to_widths(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const std::string& item : split(v, ',')) out.push_back(to_uint(key, item));
  if (out.empty()) bad_value(key, v, "a comma-separated width list");
  return out;
}

template <typename E>
std::vector<E> to_enum_list(const std::string& key, const std::string& v,
                            std::optional<E> (*parse)(const std::string&)) {
  std::vector<E> out;
  for (const std::string& item : split(v, ',')) {
    auto e = parse(item);
    if (!e) bad_value(key, item, "a known enum value");
    out.push_back(*e);
  }
  return out;
}

std::string widths_str(const std::vector<std::size_t>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

template <typename E>
std::string enum_list_str(const std::vector<E>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
  return s;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

MEConfig& me_of(ModelConfig& m) {
  if (!m.me) m.me = MEConfig{};
  return *m.me;
}

void set_model_value(ModelConfig& m, const std::string& key, const std::string& k, const std::string& v) {
  if (k == "relation_layers") m.relation_layers = to_uint(key, v);
  else if (k == "layer1_widths") m.layer1_widths = to_widths(key, v);
  else if (k == "deeper_widths") m.deeper_widths = to_widths(key, v);
  else if (k == "f_phi_widths") m.f_phi_widths = to_widths(key, v);
  else if (k == "projection_dim") m.projection_dim = to_uint(key, v);
  else if (k == "conv_channels") m.conv_channels = to_uint(key, v);
  else if (k == "conv_count") m.conv_count = to_uint(key, v);
  else if (k == "image_size") m.image_size = to_uint(key, v);
  else if (k == "aggregation") {
    if (v == "sum") m.aggregation = Aggregation::kSum;
    else if (v == "mean") m.aggregation = Aggregation::kMean;
    else bad_value(key, v, "sum or mean");
  } else if (k == "dropout") m.dropout = to_bool(key, v);
  else if (k == "dropout_rate") m.dropout_rate = to_double(key, v);
  else if (k == "me" || k == "me.enabled") {
    if (to_bool(key, v)) me_of(m);
    else m.me.reset();
  } else if (k == "me.d") me_of(m).d = to_uint(key, v);
  else if (k == "me.sigma") me_of(m).sigma = to_double(key, v);
  else if (k == "me.variant") me_of(m).variant = parse_encoding_variant(v);
  else fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
}

void set_optimizer_value(OptimizerConfig& o, const std::string& key, const std::string& k, const std::string& v) {
  if (k == "kind") {
    const OptimizerKind kind = parse_optimizer_kind(v);
    if (kind != o.kind) o = OptimizerConfig::defaults(kind);
  } else if (k == "lr") o.lr = to_double(key, v);
  else if (k == "beta1") o.beta1 = to_double(key, v);
  else if (k == "beta2") o.beta2 = to_double(key, v);
  else if (k == "eps") o.eps = to_double(key, v);
  else if (k == "weight_decay") o.weight_decay = to_double(key, v);
  else if (k == "trust_offset") o.trust_denominator_offset = to_double(key, v);
  else if (k == "grad_clip_norm") o.grad_clip_norm = to_double(key, v);
  else if (k == "clip_mode") {
    if (v == "global_norm") o.clip_mode = ClipMode::kGlobalNorm;
    else if (v == "per_element") o.clip_mode = ClipMode::kPerElement;
    else bad_value(key, v, "global_norm or per_element");
  } else if (k == "warmup_epochs") o.warmup_epochs = to_double(key, v);
  else if (k == "l2") o.l2 = to_double(key, v);
  else if (k == "activation_penalty") o.activation_penalty = to_double(key, v);
  else fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
}

void set_generator_value(GeneratorConfig& g, const std::string& key, const std::string& k, const std::string& v) {
  if (k == "image_size") g.image_size = to_uint(key, v);
  else if (k == "grid") g.grid = to_uint(key, v);
  else if (k == "number_max") g.number_max = static_cast<int>(to_uint(key, v));
  else if (k == "size_levels") g.size_levels = static_cast<int>(to_uint(key, v));
  else if (k == "color_levels") g.color_levels = static_cast<int>(to_uint(key, v));
  else if (k == "type_count") g.type_count = static_cast<int>(to_uint(key, v));
  else if (k == "line_type_count") g.line_type_count = static_cast<int>(to_uint(key, v));
  else if (k == "triples_per_sample") g.triples_per_sample = to_uint(key, v);
  else if (k == "distractors") g.distractors = to_bool(key, v);
  else if (k == "column_wise") g.column_wise = to_bool(key, v);
  else if (k == "legal") {
    g.legal.clear();
    for (const std::string& item : split(v, ',')) g.legal.push_back(StructureTriple::parse(item));
  } else if (k == "objects") g.objects = to_enum_list<ObjectType>(key, v, parse_object);
  else if (k == "attributes") g.attributes = to_enum_list<AttributeType>(key, v, parse_attribute);
  else if (k == "relations") g.relations = to_enum_list<RelationType>(key, v, parse_relation);
  else if (k == "seed") g.seed = to_uint(key, v);
  else if (k == "foil_retry_budget") g.foil_retry_budget = static_cast<int>(to_uint(key, v));
  else fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
}

void set_train_value(TrainConfig& c, const std::string& key, const std::string& k, const std::string& v) {
  if (k == "batch_size") c.batch_size = to_uint(key, v);
  else if (k == "micro_batch") c.micro_batch = to_uint(key, v);
  else if (k == "epochs") c.epochs = to_uint(key, v);
  else if (k == "seed") c.seed = to_uint(key, v);
  else if (k == "data" || k == "train_path") c.train_path = v;
  else if (k == "val" || k == "val_path") c.val_path = v;
  else if (k == "checkpoint" || k == "checkpoint_path") c.checkpoint_path = v;
  else if (k == "metrics" || k == "metrics_path") c.metrics_path = v;
  else if (k == "dropout") c.model.dropout = to_bool(key, v);
  else if (k == "train_accuracy") {
    if (v == "running") c.train_accuracy = TrainAccuracy::kRunning;
    else if (v == "full") c.train_accuracy = TrainAccuracy::kFull;
    else bad_value(key, v, "running or full");
  } else if (k == "stop_at_val_acc") c.stop_at_val_acc = to_double(key, v);
  else if (k == "train_count") c.train_count = to_uint(key, v);
  else if (k == "val_count") c.val_count = to_uint(key, v);
  else fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
}

struct Line {
  std::string key;
  std::string value;
};

std::vector<Line> config_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::kInvalidArgument,
            "config line " + std::to_string(n) + " is not key=value: '" + line + "'");
    out.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }
  return out;
}

}  // namespace

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  require(dot != std::string::npos, ErrorCode::kInvalidArgument, "config key '" + key + "' needs a section prefix");
  const std::string section = key.substr(0, dot);
  const std::string k = key.substr(dot + 1);
  if (section == "model") set_model_value(cfg.model, key, k, value);
  else if (section == "optimizer") set_optimizer_value(cfg.optimizer, key, k, value);
  else if (section == "generator") set_generator_value(cfg.generator, key, k, value);
  else if (section == "train") set_train_value(cfg, key, k, value);
  else fail(ErrorCode::kInvalidArgument, "unknown config section '" + section + "'");
}

TrainConfig parse_config(const std::string& text) {
  TrainConfig cfg;
  const std::vector<Line> lines = config_lines(text);
  // The optimizer kind picks the defaults the other optimizer keys refine.
  for (const Line& l : lines)
    if (l.key == "optimizer.kind") set_config_value(cfg, l.key, l.value);
  for (const Line& l : lines)
    if (l.key != "optimizer.kind") set_config_value(cfg, l.key, l.value);
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_model_config(const ModelConfig& m) {
  std::ostringstream os;
  os << "relation_layers=" << m.relation_layers << "\n"
     << "layer1_widths=" << widths_str(m.layer1_widths) << "\n"
     << "deeper_widths=" << widths_str(m.deeper_widths) << "\n"
     << "f_phi_widths=" << widths_str(m.f_phi_widths) << "\n"
     << "projection_dim=" << m.projection_dim << "\n"
     << "conv_channels=" << m.conv_channels << "\n"
     << "conv_count=" << m.conv_count << "\n"
     << "image_size=" << m.image_size << "\n"
     << "aggregation=" << (m.aggregation == Aggregation::kSum ? "sum" : "mean") << "\n"
     << "dropout=" << (m.dropout ? "true" : "false") << "\n"
     << "dropout_rate=" << num(m.dropout_rate) << "\n"
     << "me.enabled=" << (m.me ? "true" : "false") << "\n";
  if (m.me)
    os << "me.d=" << m.me->d << "\n"
       << "me.sigma=" << num(m.me->sigma) << "\n"
       << "me.variant=" << to_string(m.me->variant) << "\n";
  return os.str();
}

ModelConfig parse_model_config(const std::string& text) {
  ModelConfig m;
  for (const Line& l : config_lines(text)) set_model_value(m, "model." + l.key, l.key, l.value);
  return m;
}

std::string format_config(const TrainConfig& c) {
  std::ostringstream os;
  std::istringstream model(format_model_config(c.model));
  for (std::string line; std::getline(model, line);) os << "model." << line << "\n";
  const OptimizerConfig& o = c.optimizer;
  os << "optimizer.kind=" << to_string(o.kind) << "\n"
     << "optimizer.lr=" << num(o.lr) << "\n"
     << "optimizer.beta1=" << num(o.beta1) << "\n"
     << "optimizer.beta2=" << num(o.beta2) << "\n"
     << "optimizer.eps=" << num(o.eps) << "\n"
     << "optimizer.weight_decay=" << num(o.weight_decay) << "\n"
     << "optimizer.trust_offset=" << num(o.trust_denominator_offset) << "\n"
     << "optimizer.grad_clip_norm=" << num(o.grad_clip_norm) << "\n"
     << "optimizer.clip_mode=" << (o.clip_mode == ClipMode::kGlobalNorm ? "global_norm" : "per_element") << "\n"
     << "optimizer.warmup_epochs=" << num(o.warmup_epochs) << "\n"
     << "optimizer.l2=" << num(o.l2) << "\n"
     << "optimizer.activation_penalty=" << num(o.activation_penalty) << "\n";
  const GeneratorConfig& g = c.generator;
  std::string legal;
  for (std::size_t i = 0; i < g.legal.size(); ++i) legal += (i ? "," : "") + g.legal[i].str();
  os << "generator.image_size=" << g.image_size << "\n"
     << "generator.grid=" << g.grid << "\n"
     << "generator.number_max=" << g.number_max << "\n"
     << "generator.size_levels=" << g.size_levels << "\n"
     << "generator.color_levels=" << g.color_levels << "\n"
     << "generator.type_count=" << g.type_count << "\n"
     << "generator.line_type_count=" << g.line_type_count << "\n"
     << "generator.triples_per_sample=" << g.triples_per_sample << "\n"
     << "generator.distractors=" << (g.distractors ? "true" : "false") << "\n"
     << "generator.column_wise=" << (g.column_wise ? "true" : "false") << "\n"
     << "generator.legal=" << legal << "\n";
  if (!g.objects.empty()) os << "generator.objects=" << enum_list_str(g.objects) << "\n";
  if (!g.attributes.empty()) os << "generator.attributes=" << enum_list_str(g.attributes) << "\n";
  if (!g.relations.empty()) os << "generator.relations=" << enum_list_str(g.relations) << "\n";
  os << "generator.seed=" << g.seed << "\n"
     << "generator.foil_retry_budget=" << g.foil_retry_budget << "\n";
  os << "train.batch_size=" << c.batch_size << "\n"
     << "train.micro_batch=" << c.micro_batch << "\n"
     << "train.epochs=" << c.epochs << "\n"
     << "train.seed=" << c.seed << "\n";
  if (!c.train_path.empty()) os << "train.train_path=" << c.train_path << "\n";
  if (!c.val_path.empty()) os << "train.val_path=" << c.val_path << "\n";
  if (!c.checkpoint_path.empty()) os << "train.checkpoint_path=" << c.checkpoint_path << "\n";
  if (!c.metrics_path.empty()) os << "train.metrics_path=" << c.metrics_path << "\n";
  os << "train.train_accuracy=" << (c.train_accuracy == TrainAccuracy::kRunning ? "running" : "full") << "\n"
     << "train.stop_at_val_acc=" << num(c.stop_at_val_acc) << "\n"
     << "train.train_count=" << c.train_count << "\n"
     << "train.val_count=" << c.val_count << "\n";
  return os.str();
}

}  // namespace mlrn
