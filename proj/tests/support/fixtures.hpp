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

// Fixture economies and random instance generators shared by the unit and
// acceptance suites.

#include <algorithm>
#include <cmath>
#include <vector>

#include "flexauction/flexauction.hpp"

namespace flexauction::testing {

// Linear density on [lo, hi]: (1 + s (x - 1/2)) / (hi - lo), x = (t - lo) / (hi - lo).
// Positive for |s| < 2. Larger s puts more mass near hi.
inline PiecewiseLinearDensity linear_density(double lo, double hi, double s) {
  const double w = hi - lo;
  return {{lo, hi}, {(1.0 - 0.5 * s) / w, (1.0 + 0.5 * s) / w}};
}

inline PiecewiseLinearDensity tent_density(double lo, double hi) {
  // 0.1, 0.9, 0.1 on [0, 2] scaled to [lo, hi].
  const double w = hi - lo;
  return {{lo, lo + 0.5 * w, hi}, {0.1 * 2.0 / w, 0.9 * 2.0 / w, 0.1 * 2.0 / w}};
}

// f(t) = 2t on [0, 1] with a 1e-9 floor so the density stays positive at 0.
inline ConsumerTypeModel triangular_model() {
  constexpr double eps = 1e-9;
  return ConsumerTypeModel(0, 0.0, 1.0, {1.0}, {{{0.0, 1.0}, {eps, 2.0 - eps}}});
}

inline ConsumerTypeModel uniform_model(int id, double lo, double hi, int k, std::vector<double> mass = {}) {
  if (mass.empty()) {
    mass.assign(static_cast<std::size_t>(k), 0.0);
    mass[0] = 1.0;
  }
  return ConsumerTypeModel::uniform(id, lo, hi, std::move(mass));
}

// Two consumers, B_1 = {1}, B_2 = {1, 2}. Consumer 0 is the (approximately)
// known bidder: level 2 for sure, valuation concentrated around 1. Consumer 1
// is uniform on [0.5, 2] x {1, 2}.
inline Economy nested_two_goods() {
  std::vector<ConsumerTypeModel> models;
  models.emplace_back(0, 0.0, 2.0, std::vector<double>{0.0, 1.0},
                      std::vector<PiecewiseLinearDensity>{tent_density(0.0, 2.0), tent_density(0.0, 2.0)});
  models.push_back(ConsumerTypeModel::uniform(1, 0.5, 2.0, {0.5, 0.5}));
  return {std::move(models), FlexibilityStructure({1, 1})};
}

// Three i.i.d. consumers, uniform[0, 1] independent of the level.
inline Economy iid_uniform_two_level() {
  std::vector<ConsumerTypeModel> models;
  for (int i = 0; i < 3; ++i) models.push_back(ConsumerTypeModel::uniform(i, 0.0, 1.0, {0.6, 0.4}));
  return {std::move(models), FlexibilityStructure({1, 1})};
}

// Heterogeneous consumers whose densities tilt toward lower valuations as the
// level rises (likelihood-ratio ordered, hence hazard-rate ordered).
inline Economy heterogeneous_three_level() {
  std::vector<ConsumerTypeModel> models;
  auto make = [&](int id, double lo, double hi, std::vector<double> mass, std::vector<double> slopes) {
    std::vector<PiecewiseLinearDensity> d;
    for (double s : slopes) d.push_back(linear_density(lo, hi, s));
    models.emplace_back(id, lo, hi, std::move(mass), std::move(d));
  };
  make(0, 0.0, 1.0, {0.5, 0.3, 0.2}, {1.0, 0.0, -1.0});
  make(1, 0.2, 1.5, {0.2, 0.4, 0.4}, {0.5, 0.5, -0.5});
  make(2, 0.0, 2.0, {0.3, 0.3, 0.4}, {1.5, 0.5, 0.0});
  return {std::move(models), FlexibilityStructure({1, 1, 1})};
}

inline Economy single_uniform() {
  std::vector<ConsumerTypeModel> models;
  models.push_back(ConsumerTypeModel::uniform(0, 0.0, 1.0, {1.0}));
  return {std::move(models), FlexibilityStructure({1})};
}

inline bool passes_assumptions(const ConsumerTypeModel& m, int hazard_grid = 200) {
  if (!validate_hazard(m, hazard_grid).weak_ok) return false;
  const auto neg = validate_negative_reserve(m);
  return std::all_of(neg.begin(), neg.end(), [](bool b) { return b; });
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform01(rng) * (hi - lo + 1));
}

inline double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Piecewise-linear model with k levels on a random support satisfying the weak
// hazard condition and negative reserve at every level.
inline ConsumerTypeModel random_model(Rng& rng, int id, int k) {
  while (true) {
    const double width = uniform_real(rng, 0.5, 2.0);
    const double lo = uniform_real(rng, 0.0, 0.4 * width);
    const double hi = lo + width;
    std::vector<double> mass(static_cast<std::size_t>(k));
    double total = 0.0;
    for (double& p : mass) total += (p = uniform_real(rng, 0.05, 1.0));
    double acc = 0.0;
    for (std::size_t l = 0; l + 1 < mass.size(); ++l) acc += (mass[l] /= total);
    mass.back() = 1.0 - acc;

    std::vector<PiecewiseLinearDensity> d;
    const double shape = uniform01(rng);
    if (shape < 0.2) {
      d.assign(static_cast<std::size_t>(k), tent_density(lo, hi));
    } else {
      std::vector<double> slopes(static_cast<std::size_t>(k));
      if (shape < 0.4) {
        std::fill(slopes.begin(), slopes.end(), uniform_real(rng, -1.8, 1.8));
      } else {
        for (double& s : slopes) s = uniform_real(rng, -1.8, 1.8);
        std::sort(slopes.begin(), slopes.end(), std::greater<>());
      }
      for (double s : slopes) d.push_back(linear_density(lo, hi, s));
    }
    ConsumerTypeModel m(id, lo, hi, std::move(mass), std::move(d));
    if (passes_assumptions(m)) return m;
  }
}

struct RandomInstance {
  Economy economy;
  TypeProfile profile;
};

// N <= 5 consumers, 1 <= M <= 5 goods, k <= 3 levels; profile drawn from the
// models.
inline RandomInstance random_instance(Rng& rng, int max_consumers = 5, int max_goods = 5, int max_levels = 3) {
  const int k = uniform_int(rng, 1, max_levels);
  const int n = uniform_int(rng, 1, max_consumers);
  const int goods = uniform_int(rng, 1, max_goods);
  std::vector<int> m(static_cast<std::size_t>(k), 0);
  for (int g = 0; g < goods; ++g) ++m[static_cast<std::size_t>(uniform_int(rng, 0, k - 1))];
  std::vector<ConsumerTypeModel> models;
  for (int i = 0; i < n; ++i) models.push_back(random_model(rng, i, k));
  RandomInstance inst{{std::move(models), FlexibilityStructure(m)}, {}};
  for (const auto& model : inst.economy.models) {
    const TypeDraw d = sample_type(model, rng);
    inst.profile.valuations.push_back(d.valuation);
    inst.profile.levels.push_back(d.level);
  }
  return inst;
}

}  // namespace flexauction::testing
