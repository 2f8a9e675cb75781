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

#pragma once

// JSON encodings of models, configurations, type profiles, auction outcomes
// and verification reports. Every document carries "schema_version": 1.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flexauction/dist.hpp"
#include "flexauction/errors.hpp"
#include "flexauction/flex.hpp"
#include "flexauction/mechanism.hpp"
#include "flexauction/verify.hpp"

namespace flexauction::io {

using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

enum class NegativeControl { none, reserve_always, naive_second_price };

struct ExperimentConfig {
  Economy economy{{}, FlexibilityStructure({1})};
  std::optional<std::uint64_t> seed;
  std::size_t samples = 20000;
  std::size_t trials = 10000;
  int grid_points = 9;
  int hazard_grid = 1000;
  int oracle_instances = 500;
  int identity_cells = 40;
  TieBreak tie_break = TieBreak::index;
  int workers = 1;
  NegativeControl negative_control = NegativeControl::none;
  std::string output;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

inline const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing field");
  return *it;
}

inline double number(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline long long integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long long>();
}

inline std::vector<double> numbers(const Json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<int> integers(const Json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<int>(integer(v[i], path + "[" + std::to_string(i) + "]")));
  }
  return out;
}

inline void check_schema(const Json& doc, const std::string& path) {
  if (doc.is_object() && doc.contains("schema_version")) {
    const long long v = integer(doc["schema_version"], path + ".schema_version");
    if (v != kSchemaVersion) fail(path + ".schema_version", "unsupported version " + std::to_string(v));
  }
}

}  // namespace detail

inline Json parse_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

inline Json load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path.string());
}

inline ConsumerTypeModel model_from_json(const Json& j, const std::string& path = "model") {
  using detail::field;
  detail::check_schema(j, path);
  const int id = static_cast<int>(detail::integer(field(j, "consumer_id", path), path + ".consumer_id"));
  const long long k = detail::integer(field(j, "k", path), path + ".k");
  const auto support = detail::numbers(field(j, "support", path), path + ".support");
  if (support.size() != 2) detail::fail(path + ".support", "expected [min, max]");
  auto mass = detail::numbers(field(j, "level_mass", path), path + ".level_mass");
  if (static_cast<long long>(mass.size()) != k) {
    detail::fail(path + ".level_mass", "expected " + std::to_string(k) + " entries");
  }
  const Json& dens = field(j, "densities", path);
  if (!dens.is_array() || static_cast<long long>(dens.size()) != k) {
    detail::fail(path + ".densities", "expected an array of " + std::to_string(k) + " densities");
  }
  std::vector<PiecewiseLinearDensity> densities;
  for (std::size_t l = 0; l < dens.size(); ++l) {
    const std::string p = path + ".densities[" + std::to_string(l) + "]";
    densities.push_back({detail::numbers(field(dens[l], "knots", p), p + ".knots"),
                         detail::numbers(field(dens[l], "values", p), p + ".values")});
  }
  try {
    return ConsumerTypeModel(id, support[0], support[1], std::move(mass), std::move(densities));
  } catch (const ModelError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline Json model_to_json(const ConsumerTypeModel& m) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["consumer_id"] = m.consumer_id();
  j["k"] = m.levels();
  j["support"] = {m.support_min(), m.support_max()};
  j["level_mass"] = std::vector<double>(m.level_mass().begin(), m.level_mass().end());
  j["densities"] = Json::array();
  for (Level l = 1; l <= m.levels(); ++l) {
    const auto& d = m.density_spec(l);
    j["densities"].push_back({{"knots", d.knots}, {"values", d.values}});
  }
  return j;
}

inline TieBreak tie_break_from_string(const std::string& s, const std::string& path) {
  if (s == "index") return TieBreak::index;
  if (s == "random") return TieBreak::random;
  detail::fail(path, "expected \"index\" or \"random\", got \"" + s + "\"");
}

inline NegativeControl negative_control_from_string(const std::string& s, const std::string& path) {
  if (s == "none") return NegativeControl::none;
  if (s == "reserve_always") return NegativeControl::reserve_always;
  if (s == "naive_second_price") return NegativeControl::naive_second_price;
  detail::fail(path, "expected none, reserve_always or naive_second_price");
}

// Consumers may be inline models or {"file": path}, resolved relative to
// `base_dir`.
inline ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir,
                                         const std::string& path = "config") {
  using detail::field;
  detail::check_schema(j, path);
  ExperimentConfig cfg;
  const Json& st = field(j, "structure", path);
  const auto m = detail::integers(field(st, "m", path + ".structure"), path + ".structure.m");
  try {
    cfg.economy.structure = FlexibilityStructure(m);
  } catch (const DomainError& e) {
    detail::fail(path + ".structure.m", e.what());
  }
  const Json& cons = field(j, "consumers", path);
  if (!cons.is_array()) detail::fail(path + ".consumers", "expected an array");
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const std::string p = path + ".consumers[" + std::to_string(i) + "]";
    if (cons[i].is_object() && cons[i].contains("file")) {
      if (!cons[i]["file"].is_string()) detail::fail(p + ".file", "expected a path");
      const std::filesystem::path file = base_dir / cons[i]["file"].get<std::string>();
      cfg.economy.models.push_back(model_from_json(load_file(file), file.string()));
    } else {
      cfg.economy.models.push_back(model_from_json(cons[i], p));
    }
    if (cfg.economy.models.back().levels() != cfg.economy.structure.levels()) {
      detail::fail(p + ".k", "model has " + std::to_string(cfg.economy.models.back().levels()) +
                                 " levels but the structure has " + std::to_string(cfg.economy.structure.levels()));
    }
  }
  auto count = [&](const char* key, auto& target) {
    if (j.contains(key)) {
      const long long v = detail::integer(j[key], path + "." + key);
      if (v < 0) detail::fail(path + "." + key, "must be nonnegative");
      target = static_cast<std::remove_reference_t<decltype(target)>>(v);
    }
  };
  if (j.contains("seed")) {
    const Json& s = j["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      detail::fail(path + ".seed", "expected a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  count("samples", cfg.samples);
  count("trials", cfg.trials);
  count("grid_points", cfg.grid_points);
  count("hazard_grid", cfg.hazard_grid);
  count("oracle_instances", cfg.oracle_instances);
  count("identity_cells", cfg.identity_cells);
  count("workers", cfg.workers);
  if (j.contains("tie_break")) {
    if (!j["tie_break"].is_string()) detail::fail(path + ".tie_break", "expected a string");
    cfg.tie_break = tie_break_from_string(j["tie_break"].get<std::string>(), path + ".tie_break");
  }
  if (j.contains("negative_control")) {
    if (!j["negative_control"].is_string()) detail::fail(path + ".negative_control", "expected a string");
    cfg.negative_control =
        negative_control_from_string(j["negative_control"].get<std::string>(), path + ".negative_control");
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) detail::fail(path + ".output", "expected a path");
    cfg.output = j["output"].get<std::string>();
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& file) {
  return config_from_json(load_file(file), file.parent_path(), file.string());
}

inline Json profile_to_json(const TypeProfile& p) {
  return Json{{"valuations", p.valuations}, {"levels", p.levels}};
}

// Accepts a bare profile or any document with a "profile" member (such as an
// emitted outcome).
inline TypeProfile profile_from_json(const Json& j, const std::string& path = "profile") {
  detail::check_schema(j, path);
  if (j.is_object() && j.contains("profile")) return profile_from_json(j["profile"], path + ".profile");
  TypeProfile p;
  p.valuations = detail::numbers(detail::field(j, "valuations", path), path + ".valuations");
  p.levels = detail::integers(detail::field(j, "levels", path), path + ".levels");
  if (p.valuations.size() != p.levels.size()) detail::fail(path, "valuations and levels differ in length");
  return p;
}

inline Json outcome_to_json(const TypeProfile& profile, const AuctionOutcome& o) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["profile"] = profile_to_json(profile);
  j["allocation"] = Json::array();
  for (int l = 0; l < o.allocation.consumers(); ++l) {
    if (const auto g = o.allocation.good_of(l)) j["allocation"].push_back({{"consumer", l}, {"good", *g}});
  }
  j["payments"] = o.payments;
  j["winners"] = o.winners;
  Json thr;
  thr["w_thr"] = o.w_thr;
  thr["winner_theta_thr"] = Json::array();
  for (std::size_t i = 0; i < o.winners.size(); ++i) {
    thr["winner_theta_thr"].push_back({{"consumer", o.winners[i]}, {"theta", o.winner_thresholds[i]}});
  }
  j["thresholds"] = std::move(thr);
  Json tr;
  tr["virtual_valuations"] = o.trace.virtual_valuations;
  tr["dropped"] = o.trace.dropped;
  tr["positive_demand"] = o.trace.positive_demand.n;
  tr["removals"] = o.trace.removals.r;
  tr["iterations"] = Json::array();
  for (const auto& it : o.trace.iterations) {
    tr["iterations"].push_back({{"level", it.level},
                                {"pool_size", it.pool_size},
                                {"removals", it.removals},
                                {"w_threshold", it.w_threshold},
                                {"removed", it.removed}});
  }
  j["trace"] = std::move(tr);
  return j;
}

inline Json report_to_json(const VerificationReport& r, const std::string& scope) {
  Json j;
  j["check"] = r.check;
  j["scope"] = scope;
  j["passed"] = r.passed;
  j["worst_margin"] = r.worst_margin;
  j["worst_z"] = std::isnan(r.worst_z) ? Json(nullptr) : Json(r.worst_z);
  j["worst_case"] = r.worst_case;
  j["comparisons"] = r.comparisons;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["config_digest"] = r.config_digest;
  return j;
}

}  // namespace flexauction::io
