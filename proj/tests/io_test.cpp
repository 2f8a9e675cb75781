// Copyright 2026 The flexauction Authors
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

#include "flexauction/io.hpp"

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"

namespace flexauction::io {
namespace {

namespace fs = std::filesystem;

std::string parse_error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "<no error>";
}

Json uniform_json(int id, int k) {
  Json j = model_to_json(testing::uniform_model(id, 0.0, 1.0, k));
  j.erase("schema_version");
  return j;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("flexauction_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p;
  }
  fs::path dir_;
};

TEST(ModelJson, RoundTrip) {
  const auto e = testing::heterogeneous_three_level();
  for (const auto& m : e.models) {
    const ConsumerTypeModel back = model_from_json(parse_text(model_to_json(m).dump(), "mem"));
    EXPECT_EQ(back.consumer_id(), m.consumer_id());
    EXPECT_EQ(back.levels(), m.levels());
    for (Level l = 1; l <= m.levels(); ++l) {
      EXPECT_EQ(back.density_spec(l).knots, m.density_spec(l).knots);
      for (double x : {0.1, 0.5, 0.9}) {
        const double t = m.support_min() + x * (m.support_max() - m.support_min());
        EXPECT_DOUBLE_EQ(back.cdf(l, t), m.cdf(l, t));
      }
    }
  }
}

TEST(ModelJson, ErrorsNameTheField) {
  Json j = uniform_json(0, 2);
  j["densities"][1].erase("knots");
  EXPECT_NE(parse_error_of([&] { model_from_json(j); }).find("model.densities[1].knots: missing field"),
            std::string::npos);

  j = uniform_json(0, 2);
  j["level_mass"] = {1.0};
  EXPECT_NE(parse_error_of([&] { model_from_json(j); }).find("model.level_mass"), std::string::npos);

  j = uniform_json(0, 1);
  j["support"] = {0.0, "x"};
  EXPECT_NE(parse_error_of([&] { model_from_json(j); }).find("model.support[1]: expected a number"),
            std::string::npos);

  j = uniform_json(0, 1);
  j["densities"][0]["values"] = {2.0, 2.0};  // integrates to 2
  EXPECT_NE(parse_error_of([&] { model_from_json(j); }).find("model:"), std::string::npos);

  j = uniform_json(0, 1);
  j["schema_version"] = 7;
  EXPECT_NE(parse_error_of([&] { model_from_json(j); }).find("unsupported version 7"), std::string::npos);
}

TEST(ParseText, ReportsLine) {
  const std::string msg = parse_error_of([] { parse_text("{\n  \"a\": 1,\n  oops\n}", "cfg.json"); });
  EXPECT_NE(msg.find("cfg.json"), std::string::npos);
  EXPECT_NE(msg.find("line 3"), std::string::npos);
}

TEST_F(TempDir, ConfigResolvesModelFilesAndDefaults) {
  write("models/a.json", uniform_json(0, 2).dump());
  Json cfg;
  cfg["schema_version"] = 1;
  cfg["structure"] = {{"m", {1, 1}}};
  cfg["consumers"] = {{{"file", "models/a.json"}}, uniform_json(1, 2)};
  cfg["seed"] = 42;
  cfg["samples"] = 5000;
  cfg["tie_break"] = "random";
  cfg["negative_control"] = "reserve_always";
  const fs::path p = write("configs/run.json", cfg.dump());
  write("configs/models/a.json", uniform_json(0, 2).dump());
  const ExperimentConfig c = load_config(p);
  EXPECT_EQ(c.economy.consumers(), 2);
  EXPECT_EQ(c.economy.structure.goods(), 2);
  EXPECT_EQ(c.seed, 42U);
  EXPECT_EQ(c.samples, 5000U);
  EXPECT_EQ(c.trials, 10000U);
  EXPECT_EQ(c.tie_break, TieBreak::random);
  EXPECT_EQ(c.negative_control, NegativeControl::reserve_always);
  EXPECT_EQ(c.workers, 1);
}

TEST_F(TempDir, ConfigErrors) {
  const Json base = {{"structure", {{"m", {1, 1}}}}, {"consumers", {uniform_json(0, 2)}}};
  auto msg = [&](const Json& j) { return parse_error_of([&] { config_from_json(j, dir_); }); };

  Json j = base;
  j["consumers"][0] = uniform_json(0, 1);
  EXPECT_NE(msg(j).find("config.consumers[0].k"), std::string::npos);
  j = base;
  j["seed"] = -1;
  EXPECT_NE(msg(j).find("config.seed"), std::string::npos);
  j = base;
  j["tie_break"] = "coin";
  EXPECT_NE(msg(j).find("config.tie_break"), std::string::npos);
  j = base;
  j["structure"]["m"] = {1, -1};
  EXPECT_NE(msg(j).find("config.structure.m"), std::string::npos);
  j = base;
  j["consumers"][0] = {{"file", "missing.json"}};
  EXPECT_NE(msg(j).find("cannot open file"), std::string::npos);
  j = base;
  j.erase("structure");
  EXPECT_NE(msg(j).find("config.structure: missing field"), std::string::npos);
  EXPECT_FALSE(config_from_json(base, dir_).seed.has_value());
}

TEST(OutcomeJson, ReingestedProfileReproducesOutcome) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = testing::random_instance(rng);
    const auto& e = inst.economy;
    const Json out = outcome_to_json(inst.profile, run_auction(e.models, e.structure, inst.profile));
    const TypeProfile back = profile_from_json(parse_text(out.dump(), "mem"));
    EXPECT_EQ(back, inst.profile);
    EXPECT_EQ(outcome_to_json(back, run_auction(e.models, e.structure, back)).dump(), out.dump());
  }
}

TEST(OutcomeJson, ThreeBidderExample) {
  std::vector<ConsumerTypeModel> models;
  for (int i = 0; i < 3; ++i) models.push_back(testing::uniform_model(i, 0.0, 1.0, 1));
  const TypeProfile p{{0.9, 0.8, 0.7}, {1, 1, 1}};
  const Json j = outcome_to_json(p, run_auction(models, FlexibilityStructure({1}), p));
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["allocation"].dump(), R"([{"consumer":0,"good":1}])");
  EXPECT_NEAR(j["payments"][0].get<double>(), 0.8, 1e-9);
  EXPECT_EQ(j["trace"]["removals"].dump(), "[2]");
  EXPECT_EQ(j["trace"]["iterations"][0]["removed"].dump(), "[2,1]");
}

TEST(ReportJson, NanBecomesNull) {
  VerificationReport r;
  r.check = "ir_expost";
  const Json j = report_to_json(r, "economy");
  EXPECT_TRUE(j["worst_z"].is_null());
  EXPECT_EQ(j["scope"], "economy");
}

}  // namespace
}  // namespace flexauction::io
