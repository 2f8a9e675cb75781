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

// Consumer type distributions over (valuation, flexibility level) and the
// quantities the optimal auction is built from: conditional CDFs, hazard
// rates and virtual valuations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flexauction/errors.hpp"
#include "flexauction/random.hpp"

namespace flexauction {

using Valuation = double;
// Flexibility levels are 1-based: level l means the consumer accepts any good
// of the l-th nested set.
using Level = int;

struct PiecewiseLinearDensity {
  std::vector<double> knots;
  std::vector<double> values;

  static PiecewiseLinearDensity uniform(double lo, double hi) {
    return {{lo, hi}, {1.0 / (hi - lo), 1.0 / (hi - lo)}};
  }
};

struct TypeDraw {
  Valuation valuation = 0.0;
  Level level = 1;
};

// Joint distribution of one consumer's private type. Immutable once built;
// the constructor enforces every invariant and throws ModelError otherwise.
class ConsumerTypeModel {
 public:
  static constexpr double kMassTolerance = 1e-12;
  static constexpr double kDensityTolerance = 1e-10;

  ConsumerTypeModel(int consumer_id, double support_min, double support_max,
                    std::vector<double> level_mass,
                    std::vector<PiecewiseLinearDensity> densities)
      : consumer_id_(consumer_id),
        lo_(support_min),
        hi_(support_max),
        level_mass_(std::move(level_mass)),
        specs_(std::move(densities)) {
    validate_and_index();
  }

  // Valuation density independent of the level: the same uniform density on
  // [lo, hi] for every level.
  static ConsumerTypeModel uniform(int consumer_id, double lo, double hi,
                                   std::vector<double> level_mass) {
    std::vector<PiecewiseLinearDensity> d(level_mass.size(), PiecewiseLinearDensity::uniform(lo, hi));
    return ConsumerTypeModel(consumer_id, lo, hi, std::move(level_mass), std::move(d));
  }

  int consumer_id() const { return consumer_id_; }
  int levels() const { return static_cast<int>(level_mass_.size()); }
  double support_min() const { return lo_; }
  double support_max() const { return hi_; }
  std::span<const double> level_mass() const { return level_mass_; }
  const PiecewiseLinearDensity& density_spec(Level level) const {
    check_level(level);
    return specs_[static_cast<std::size_t>(level - 1)];
  }

  double density(Level level, Valuation theta) const {
    const Table& t = table(level, theta);
    const std::size_t j = segment(t, theta);
    return value_at(t, j, theta);
  }

  double cdf(Level level, Valuation theta) const {
    const Table& t = table(level, theta);
    if (theta == lo_) return 0.0;
    if (theta == hi_) return 1.0;
    const std::size_t j = segment(t, theta);
    const double x = theta - t.knots[j];
    return std::min(1.0, t.cum[j] + 0.5 * x * (t.values[j] + value_at(t, j, theta)));
  }

  // 1 - F, accumulated from the right so it keeps full relative precision
  // close to the top of the support.
  double survival(Level level, Valuation theta) const {
    const Table& t = table(level, theta);
    if (theta == lo_) return 1.0;
    if (theta == hi_) return 0.0;
    const std::size_t j = segment(t, theta);
    const double x = t.knots[j + 1] - theta;
    return std::min(1.0, t.tail[j + 1] + 0.5 * x * (value_at(t, j, theta) + t.values[j + 1]));
  }

  // Smallest theta with F(theta | level) >= p, in closed form per segment.
  Valuation quantile(Level level, double p) const {
    check_level(level);
    const Table& t = tables_[static_cast<std::size_t>(level - 1)];
    if (!(p > 0.0)) return lo_;
    if (p >= 1.0) return hi_;
    const auto it = std::upper_bound(t.cum.begin(), t.cum.end(), p);
    std::size_t j = static_cast<std::size_t>(it - t.cum.begin());
    j = std::clamp<std::size_t>(j, 1, t.knots.size() - 1) - 1;
    const double d = p - t.cum[j];
    const double v0 = t.values[j];
    const double width = t.knots[j + 1] - t.knots[j];
    const double slope = (t.values[j + 1] - v0) / width;
    // Root of v0 x + slope x^2 / 2 = d in the cancellation-free form.
    const double x = 2.0 * d / (v0 + std::sqrt(std::max(0.0, v0 * v0 + 2.0 * slope * d)));
    return std::clamp(t.knots[j] + std::clamp(x, 0.0, width), lo_, hi_);
  }

  void check_level(Level level) const {
    if (level < 1 || level > levels()) {
      throw DomainError("consumer " + std::to_string(consumer_id_) + ": level " +
                        std::to_string(level) + " outside 1.." + std::to_string(levels()));
    }
  }

  void check_valuation(Valuation theta) const {
    if (!(theta >= lo_ && theta <= hi_)) {
      throw DomainError("consumer " + std::to_string(consumer_id_) + ": valuation " +
                        std::to_string(theta) + " outside support [" + std::to_string(lo_) +
                        ", " + std::to_string(hi_) + "]");
    }
  }

 private:
  struct Table {
    std::vector<double> knots;
    std::vector<double> values;  // normalised to unit mass
    std::vector<double> cum;     // mass on [lo, knots[j]]
    std::vector<double> tail;    // mass on [knots[j], hi]
  };

  const Table& table(Level level, Valuation theta) const {
    check_level(level);
    check_valuation(theta);
    return tables_[static_cast<std::size_t>(level - 1)];
  }

  static std::size_t segment(const Table& t, double theta) {
    const auto it = std::upper_bound(t.knots.begin(), t.knots.end(), theta);
    const auto idx = static_cast<std::size_t>(it - t.knots.begin());
    return std::clamp<std::size_t>(idx, 1, t.knots.size() - 1) - 1;
  }

  static double value_at(const Table& t, std::size_t j, double theta) {
    const double w = (theta - t.knots[j]) / (t.knots[j + 1] - t.knots[j]);
    return t.values[j] + w * (t.values[j + 1] - t.values[j]);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ModelError("consumer " + std::to_string(consumer_id_) + ": " + what);
  }

  void validate_and_index() {
    if (level_mass_.empty()) fail("at least one flexibility level is required");
    if (specs_.size() != level_mass_.size()) {
      fail("expected " + std::to_string(level_mass_.size()) + " densities, got " +
           std::to_string(specs_.size()));
    }
    if (!std::isfinite(lo_) || !std::isfinite(hi_) || lo_ < 0.0 || !(lo_ < hi_)) {
      fail("support must satisfy 0 <= min < max");
    }
    double mass = 0.0;
    for (double p : level_mass_) {
      if (!(p >= 0.0) || !std::isfinite(p)) fail("level masses must be nonnegative");
      mass += p;
    }
    if (std::abs(mass - 1.0) > kMassTolerance) fail("level masses must sum to 1");

    tables_.clear();
    for (std::size_t l = 0; l < specs_.size(); ++l) {
      const auto& spec = specs_[l];
      const std::string tag = "density of level " + std::to_string(l + 1) + ": ";
      if (spec.knots.size() < 2) fail(tag + "needs at least two knots");
      if (spec.values.size() != spec.knots.size()) fail(tag + "knots and values differ in length");
      if (spec.knots.front() != lo_ || spec.knots.back() != hi_) {
        fail(tag + "knots must start at the support minimum and end at its maximum");
      }
      for (std::size_t j = 0; j < spec.knots.size(); ++j) {
        if (j > 0 && !(spec.knots[j] > spec.knots[j - 1])) fail(tag + "knots must increase strictly");
        if (!(spec.values[j] > 0.0) || !std::isfinite(spec.values[j])) {
          fail(tag + "must be strictly positive on the support");
        }
      }
      Table t{spec.knots, spec.values, {}, {}};
      const std::size_t n = t.knots.size();
      t.cum.assign(n, 0.0);
      t.tail.assign(n, 0.0);
      for (std::size_t j = 1; j < n; ++j) {
        t.cum[j] = t.cum[j - 1] + 0.5 * (t.knots[j] - t.knots[j - 1]) * (t.values[j] + t.values[j - 1]);
      }
      const double total = t.cum.back();
      if (std::abs(total - 1.0) > kDensityTolerance) fail(tag + "must integrate to 1");
      for (double& v : t.values) v /= total;
      for (double& c : t.cum) c /= total;
      for (std::size_t j = n - 1; j-- > 0;) {
        t.tail[j] = t.tail[j + 1] + 0.5 * (t.knots[j + 1] - t.knots[j]) * (t.values[j] + t.values[j + 1]);
      }
      tables_.push_back(std::move(t));
    }
  }

  int consumer_id_;
  double lo_;
  double hi_;
  std::vector<double> level_mass_;
  std::vector<PiecewiseLinearDensity> specs_;
  std::vector<Table> tables_;
};

inline double cdf(const ConsumerTypeModel& model, Level level, Valuation theta) {
  return model.cdf(level, theta);
}

// Hazard rate f / (1 - F); infinite at the top of the support.
inline double hazard_rate(const ConsumerTypeModel& model, Level level, Valuation theta) {
  const double s = model.survival(level, theta);
  if (s <= 0.0) return std::numeric_limits<double>::infinity();
  return model.density(level, theta) / s;
}

// w(theta, level) = theta - (1 - F) / f. At theta_max the ratio vanishes and
// w equals theta_max.
inline double virtual_valuation(const ConsumerTypeModel& model, Level level, Valuation theta) {
  if (theta == model.support_max()) {
    model.check_level(level);
    return theta;
  }
  return theta - model.survival(level, theta) / model.density(level, theta);
}

constexpr double kInverseTolerance = 1e-10;

// Smallest theta with w(theta, level) >= target. Requires w nondecreasing in
// theta (weak hazard condition). Targets at or below w(theta_min) map to
// theta_min; targets above w(theta_max) = theta_max throw RangeError.
inline Valuation inverse_virtual_valuation(const ConsumerTypeModel& model, Level level,
                                           double target) {
  model.check_level(level);
  double a = model.support_min();
  double b = model.support_max();
  if (std::isnan(target)) throw DomainError("virtual valuation target is NaN");
  if (target <= virtual_valuation(model, level, a)) return a;
  if (target > virtual_valuation(model, level, b)) {
    throw RangeError("consumer " + std::to_string(model.consumer_id()) + ", level " +
                     std::to_string(level) + ": virtual valuation " + std::to_string(target) +
                     " is above w(theta_max)");
  }
  // Invariant: w(a) < target <= w(b).
  while (b - a > kInverseTolerance) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (virtual_valuation(model, level, mid) >= target) {
      b = mid;
    } else {
      a = mid;
    }
  }
  return b;
}

// Valuation at which the virtual valuation crosses zero.
inline Valuation reserve_price(const ConsumerTypeModel& model, Level level) {
  if (virtual_valuation(model, level, model.support_max()) < 0.0) {
    throw ModelError("consumer " + std::to_string(model.consumer_id()) +
                     " can never have a positive virtual valuation at level " +
                     std::to_string(level));
  }
  return inverse_virtual_valuation(model, level, 0.0);
}

struct HazardViolation {
  Level level = 1;             // level of the dominating type
  Level dominated_level = 1;   // level of the dominated type
  Valuation theta = 0.0;
  Valuation dominated_theta = 0.0;
  double magnitude = 0.0;      // h(dominated) - h(dominating); <= 0 means no violation
};

struct HazardReport {
  static constexpr double kTolerance = 1e-9;

  bool weak_ok = true;
  bool strict_ok = true;
  HazardViolation worst_violation;
  HazardViolation worst_strict;  // smallest h(theta|b) - max h(theta'|b'<b); positive when strict holds
  int grid_resolution = 0;
};

// Grid check of the generalized monotone hazard rate condition: whenever
// (theta, b) dominates (theta', b') componentwise, h(theta|b) >= h(theta'|b')
// up to 1e-9 (weak), and h(theta|b) > h(theta'|b') when also b > b' (strict).
// The grid is theta_min + j (theta_max - theta_min) / G for j < G.
inline HazardReport validate_hazard(const ConsumerTypeModel& model, int grid_points) {
  if (grid_points < 16) throw DomainError("hazard grid needs at least 16 points");
  const int k = model.levels();
  const auto g = static_cast<std::size_t>(grid_points);
  const double lo = model.support_min();
  const double step = (model.support_max() - lo) / grid_points;
  auto theta_at = [&](std::size_t j) { return lo + step * static_cast<double>(j); };

  struct Cell {
    double h;
    double best;  // max hazard over all dominated grid cells (inclusive)
    Level best_level;
    std::size_t best_j;
  };
  std::vector<std::vector<Cell>> cells(static_cast<std::size_t>(k), std::vector<Cell>(g));
  HazardReport report;
  report.grid_resolution = grid_points;
  report.worst_strict.magnitude = std::numeric_limits<double>::infinity();

  for (Level b = 1; b <= k; ++b) {
    auto& row = cells[static_cast<std::size_t>(b - 1)];
    for (std::size_t j = 0; j < g; ++j) {
      Cell c{hazard_rate(model, b, theta_at(j)), 0.0, b, j};
      c.best = c.h;
      if (j > 0 && row[j - 1].best > c.best) {
        c.best = row[j - 1].best;
        c.best_level = row[j - 1].best_level;
        c.best_j = row[j - 1].best_j;
      }
      if (b > 1) {
        const Cell& below = cells[static_cast<std::size_t>(b - 2)][j];
        if (below.best > c.best) {
          c.best = below.best;
          c.best_level = below.best_level;
          c.best_j = below.best_j;
        }
        // Strict part compares only against strictly lower levels.
        const double gap = c.h - below.best;
        if (gap < report.worst_strict.magnitude) {
          report.worst_strict = {b, below.best_level, theta_at(j), theta_at(below.best_j), gap};
        }
        if (!(gap > 0.0)) report.strict_ok = false;
      }
      const double violation = c.best - c.h;
      if (violation > report.worst_violation.magnitude) {
        report.worst_violation = {b, c.best_level, theta_at(j), theta_at(c.best_j), violation};
      }
      row[j] = c;
    }
  }
  if (k == 1) report.worst_strict.magnitude = 0.0;
  report.weak_ok = report.worst_violation.magnitude <= HazardReport::kTolerance;
  if (!report.weak_ok) report.strict_ok = false;
  return report;
}

// Per level: w(theta_min, level) < 0.
inline std::vector<bool> validate_negative_reserve(const ConsumerTypeModel& model) {
  std::vector<bool> ok;
  for (Level l = 1; l <= model.levels(); ++l) {
    ok.push_back(virtual_valuation(model, l, model.support_min()) < 0.0);
  }
  return ok;
}

// Level from level_mass, then valuation by inverse-CDF sampling.
template <std::uniform_random_bit_generator G>
TypeDraw sample_type(const ConsumerTypeModel& model, G& gen) {
  const double u = uniform01(gen);
  const auto mass = model.level_mass();
  Level level = 0;
  double acc = 0.0;
  for (std::size_t l = 0; l < mass.size(); ++l) {
    acc += mass[l];
    if (u < acc) {
      level = static_cast<Level>(l + 1);
      break;
    }
  }
  if (level == 0) {
    // Rounding left u above the accumulated mass: last level with mass.
    for (std::size_t l = mass.size(); l-- > 0;) {
      if (mass[l] > 0.0) {
        level = static_cast<Level>(l + 1);
        break;
      }
    }
  }
  return {model.quantile(level, uniform01(gen)), level};
}

}  // namespace flexauction
