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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mlrn/mlrn.h"

namespace {

namespace fs = std::filesystem;

std::string temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mlrn_c_api_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

const char* kSmallModel =
    "model.conv_channels=4\n"
    "model.projection_dim=7\n"
    "model.layer1_widths=12,10\n"
    "model.deeper_widths=10,10\n"
    "model.f_phi_widths=8,1\n"
    "model.me.d=4\n"
    "train.batch_size=8\n"
    "train.micro_batch=4\n"
    "train.epochs=2\n";

struct EpochLog {
  std::vector<mlrn_epoch_metrics> rows;
};

void record_epoch(const mlrn_epoch_metrics* row, void* user) { static_cast<EpochLog*>(user)->rows.push_back(*row); }

TEST(CApi, ErrorsCarryStatusAndMessage) {
  mlrn_config* cfg = nullptr;
  EXPECT_EQ(mlrn_config_parse("bogus.key=1\n", &cfg), MLRN_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_NE(std::string(mlrn_last_error()), "");
  EXPECT_EQ(mlrn_config_load(temp_path("missing.cfg").c_str(), &cfg), MLRN_ERR_IO);
  EXPECT_EQ(mlrn_config_new(nullptr), MLRN_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(mlrn_config_new(&cfg), MLRN_OK);
  EXPECT_STREQ(mlrn_last_error(), "");
  EXPECT_EQ(mlrn_config_set(cfg, "optimizer.lr", "fast"), MLRN_ERR_INVALID_ARGUMENT);
  mlrn_dataset* ds = nullptr;
  EXPECT_EQ(mlrn_dataset_read(temp_path("missing.mpgm").c_str(), &ds), MLRN_ERR_IO);
  EXPECT_STREQ(mlrn_status_name(MLRN_ERR_FORMAT), "format error");
  EXPECT_NE(std::string(mlrn_version()), "");
  mlrn_config_free(cfg);
  mlrn_config_free(nullptr);
  mlrn_dataset_free(nullptr);
}

TEST(CApi, ConfigFormatRoundTrip) {
  mlrn_config* cfg = nullptr;
  ASSERT_EQ(mlrn_config_new(&cfg), MLRN_OK);
  ASSERT_EQ(mlrn_config_set(cfg, "optimizer.lr", "0.005"), MLRN_OK);
  char* text = nullptr;
  ASSERT_EQ(mlrn_config_format(cfg, &text), MLRN_OK);
  EXPECT_NE(std::string(text).find("optimizer.lr=0.005"), std::string::npos);
  mlrn_config* back = nullptr;
  ASSERT_EQ(mlrn_config_parse(text, &back), MLRN_OK);
  char* again = nullptr;
  ASSERT_EQ(mlrn_config_format(back, &again), MLRN_OK);
  EXPECT_STREQ(text, again);
  mlrn_string_free(text);
  mlrn_string_free(again);
  mlrn_config_free(cfg);
  mlrn_config_free(back);
}

TEST(CApi, DatasetGenerateWriteRead) {
  mlrn_config* cfg = nullptr;
  ASSERT_EQ(mlrn_config_new(&cfg), MLRN_OK);
  mlrn_dataset* a = nullptr;
  ASSERT_EQ(mlrn_dataset_generate(cfg, 5, 42, &a), MLRN_OK);
  EXPECT_EQ(mlrn_dataset_size(a), 5u);
  EXPECT_EQ(mlrn_dataset_image_size(a), 32u);
  const std::string path = temp_path("gen.mpgm");
  ASSERT_EQ(mlrn_dataset_write(a, path.c_str()), MLRN_OK);
  mlrn_dataset* b = nullptr;
  ASSERT_EQ(mlrn_dataset_read(path.c_str(), &b), MLRN_OK);
  ASSERT_EQ(mlrn_dataset_size(b), 5u);
  std::vector<std::uint8_t> pa(16 * 32 * 32), pb(16 * 32 * 32);
  for (std::size_t i = 0; i < 5; ++i) {
    std::uint8_t ta = 0, tb = 0;
    ASSERT_EQ(mlrn_dataset_target(a, i, &ta), MLRN_OK);
    ASSERT_EQ(mlrn_dataset_target(b, i, &tb), MLRN_OK);
    EXPECT_EQ(ta, tb);
    EXPECT_LT(ta, 8);
    ASSERT_EQ(mlrn_dataset_panels(a, i, pa.data(), pa.size()), MLRN_OK);
    ASSERT_EQ(mlrn_dataset_panels(b, i, pb.data(), pb.size()), MLRN_OK);
    EXPECT_EQ(pa, pb);
  }
  EXPECT_EQ(mlrn_dataset_panels(a, 0, pa.data(), 10), MLRN_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mlrn_dataset_target(a, 5, pa.data()), MLRN_ERR_INVALID_ARGUMENT);
  mlrn_dataset_free(a);
  mlrn_dataset_free(b);
  mlrn_config_free(cfg);
}

TEST(CApi, TrainLoadEvaluate) {
  mlrn_config* cfg = nullptr;
  ASSERT_EQ(mlrn_config_parse(kSmallModel, &cfg), MLRN_OK);
  mlrn_dataset* tr = nullptr;
  mlrn_dataset* va = nullptr;
  ASSERT_EQ(mlrn_dataset_generate(cfg, 16, 1, &tr), MLRN_OK);
  ASSERT_EQ(mlrn_dataset_generate(cfg, 8, 2, &va), MLRN_OK);
  const std::string tp = temp_path("train.mpgm"), vp = temp_path("val.mpgm");
  const std::string ck = temp_path("model.ckpt"), mp = temp_path("metrics.csv");
  ASSERT_EQ(mlrn_dataset_write(tr, tp.c_str()), MLRN_OK);
  ASSERT_EQ(mlrn_dataset_write(va, vp.c_str()), MLRN_OK);

  EpochLog log;
  mlrn_train_options opts{};
  opts.train_path = tp.c_str();
  opts.val_path = vp.c_str();
  opts.checkpoint_path = ck.c_str();
  opts.metrics_path = mp.c_str();
  opts.on_epoch = record_epoch;
  opts.user = &log;
  ASSERT_EQ(mlrn_train(cfg, &opts), MLRN_OK) << mlrn_last_error();
  ASSERT_EQ(log.rows.size(), 2u);
  EXPECT_EQ(log.rows[1].epoch, 2u);
  EXPECT_TRUE(fs::exists(mp));

  mlrn_model* model = nullptr;
  ASSERT_EQ(mlrn_model_load(ck.c_str(), &model), MLRN_OK);
  EXPECT_GT(mlrn_model_parameter_count(model), 0u);
  float scores[8];
  ASSERT_EQ(mlrn_model_scores(model, va, 0, scores), MLRN_OK);
  for (float s : scores) EXPECT_TRUE(std::isfinite(s));

  mlrn_report* rep = nullptr;
  ASSERT_EQ(mlrn_evaluate(model, va, &rep), MLRN_OK);
  const std::size_t rows = mlrn_report_row_count(rep);
  ASSERT_GE(rows, 2u);
  const char* name = nullptr;
  double value = 0.0;
  ASSERT_EQ(mlrn_report_row(rep, rows - 1, &name, &value), MLRN_OK);
  EXPECT_STREQ(name, "Total error");
  EXPECT_DOUBLE_EQ(value, 1.0 - mlrn_report_total_acc(rep));
  ASSERT_EQ(mlrn_report_row(rep, rows - 2, &name, &value), MLRN_OK);
  EXPECT_STREQ(name, "Total acc");
  EXPECT_NEAR(value, log.rows[1].validation_acc, 1e-12);
  char* text = nullptr;
  ASSERT_EQ(mlrn_report_format(rep, &text), MLRN_OK);
  EXPECT_NE(std::string(text).find("Total error"), std::string::npos);
  mlrn_string_free(text);
  EXPECT_EQ(mlrn_report_row(rep, rows, &name, &value), MLRN_ERR_INVALID_ARGUMENT);

  // Resuming a finished run with the same epoch budget trains nothing more.
  EpochLog more;
  opts.resume_path = ck.c_str();
  opts.user = &more;
  ASSERT_EQ(mlrn_train(cfg, &opts), MLRN_OK) << mlrn_last_error();
  EXPECT_TRUE(more.rows.empty());

  mlrn_report_free(rep);
  mlrn_model_free(model);
  mlrn_dataset_free(tr);
  mlrn_dataset_free(va);
  mlrn_config_free(cfg);
}

TEST(CApi, TrainRejectsMissingInputs) {
  mlrn_config* cfg = nullptr;
  ASSERT_EQ(mlrn_config_new(&cfg), MLRN_OK);
  mlrn_train_options opts{};
  EXPECT_EQ(mlrn_train(cfg, &opts), MLRN_ERR_INVALID_ARGUMENT);
  const std::string missing = temp_path("nope.mpgm");
  opts.train_path = missing.c_str();
  EXPECT_EQ(mlrn_train(cfg, &opts), MLRN_ERR_IO);
  mlrn_config_free(cfg);
}

TEST(CApi, GradcheckTiny) {
  mlrn_gradcheck_result r{};
  ASSERT_EQ(mlrn_gradcheck(MLRN_GRADCHECK_TINY, &r), MLRN_OK);
  EXPECT_LT(r.max_relative_error, 1e-4);
  EXPECT_GT(r.checked, 0u);
  EXPECT_EQ(mlrn_gradcheck(static_cast<mlrn_gradcheck_scale>(7), &r), MLRN_ERR_INVALID_ARGUMENT);
}

}  // namespace
