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

// Revenue-maximizing auction for nested flexibility sets: drop consumers with
// nonpositive virtual valuation, then sweep the levels from least to most
// flexible, removing at each level the minimum number of lowest virtual
// valuations that keeps the remaining demand servable. Winners pay the
// valuation at which their virtual valuation meets the largest threshold they
// had to beat.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "flexauction/dist.hpp"
#include "flexauction/errors.hpp"
#include "flexauction/flex.hpp"
#include "flexauction/random.hpp"

namespace flexauction {

struct TypeProfile {
  std::vector<Valuation> valuations;
  std::vector<Level> levels;

  std::size_t size() const { return valuations.size(); }
  bool operator==(const TypeProfile&) const = default;
};

// How equal virtual valuations are ordered when a level must drop some of
// them. `index` removes the higher consumer id first; `random` draws one
// priority per consumer from a caller-owned generator.
enum class TieBreak { index, random };

struct IterationRecord {
  Level level = 1;
  int pool_size = 0;         // |L_i| = survivors so far + positive consumers of level i
  int removals = 0;          // r_i*
  double w_threshold = 0.0;  // r_i*-th lowest virtual valuation in the pool, 0 if none removed
  std::vector<int> removed;  // ids, in removal order
};

struct AllocationTrace {
  std::vector<double> virtual_valuations;  // per consumer at its reported type
  std::vector<int> dropped;                // w <= 0, never considered
  DemandProfile positive_demand;           // n+
  RemovalPlan removals;                    // r* computed from n+
  std::vector<IterationRecord> iterations;
};

struct Allocation {
  std::vector<int> winners;     // ascending ids
  AllocationMatrix matrix;
  std::vector<double> w_thr;    // per level
  AllocationTrace trace;

  bool wins(int consumer) const {
    return std::binary_search(winners.begin(), winners.end(), consumer);
  }
};

// A valuation threshold; `can_win` is false when the target virtual valuation
// is beyond w(theta_max) and `theta` then holds the theta_max sentinel.
struct ThresholdValue {
  Valuation theta = 0.0;
  bool can_win = true;
};

struct AuctionOutcome {
  AllocationMatrix allocation;
  std::vector<double> payments;
  std::vector<int> winners;
  std::vector<double> winner_thresholds;  // aligned with winners
  std::vector<double> w_thr;              // per level
  AllocationTrace trace;

  bool wins(int consumer) const {
    return std::binary_search(winners.begin(), winners.end(), consumer);
  }
};

namespace detail {

inline void check_instance(std::span<const ConsumerTypeModel> models,
                           const FlexibilityStructure& structure, const TypeProfile& profile) {
  if (profile.valuations.size() != profile.levels.size()) {
    throw DomainError("profile has " + std::to_string(profile.valuations.size()) + " valuations but " +
                      std::to_string(profile.levels.size()) + " levels");
  }
  if (models.size() != profile.size()) {
    throw DomainError("profile has " + std::to_string(profile.size()) + " consumers but " +
                      std::to_string(models.size()) + " models were given");
  }
  for (std::size_t l = 0; l < models.size(); ++l) {
    if (models[l].levels() != structure.levels()) {
      throw DomainError("consumer " + std::to_string(l) + " model has " + std::to_string(models[l].levels()) +
                        " levels, structure has " + std::to_string(structure.levels()));
    }
    models[l].check_level(profile.levels[l]);
    models[l].check_valuation(profile.valuations[l]);
  }
}

}  // namespace detail

// Threshold allocation. Consumers are identified by their position in the
// profile. `rng` is only used (and then required) for TieBreak::random.
inline Allocation allocate(std::span<const ConsumerTypeModel> models, const FlexibilityStructure& structure,
                           const TypeProfile& profile, TieBreak tie_break = TieBreak::index,
                           Rng* rng = nullptr) {
  detail::check_instance(models, structure, profile);
  const int n = static_cast<int>(profile.size());
  const int k = structure.levels();

  std::vector<double> priority(static_cast<std::size_t>(n));
  if (tie_break == TieBreak::random) {
    if (rng == nullptr) throw ContractError("random tie-break needs a generator");
    for (double& p : priority) p = uniform01(*rng);
  } else {
    // Higher id sorts first among equals, i.e. is removed first.
    for (int l = 0; l < n; ++l) priority[static_cast<std::size_t>(l)] = -l;
  }

  Allocation out;
  AllocationTrace& trace = out.trace;
  trace.virtual_valuations.resize(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> positive(static_cast<std::size_t>(k));
  for (int l = 0; l < n; ++l) {
    const Level b = profile.levels[static_cast<std::size_t>(l)];
    const double w = virtual_valuation(models[static_cast<std::size_t>(l)], b,
                                       profile.valuations[static_cast<std::size_t>(l)]);
    trace.virtual_valuations[static_cast<std::size_t>(l)] = w;
    if (w > 0.0) {
      positive[static_cast<std::size_t>(b - 1)].push_back(l);
    } else {
      trace.dropped.push_back(l);
    }
  }
  trace.positive_demand.n.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    trace.positive_demand.n[static_cast<std::size_t>(i)] = static_cast<int>(positive[static_cast<std::size_t>(i)].size());
  }
  trace.removals = minimal_removals(trace.positive_demand, structure);

  const auto& w = trace.virtual_valuations;
  auto lower = [&](int a, int b) {
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    if (w[ua] != w[ub]) return w[ua] < w[ub];
    return priority[ua] < priority[ub];
  };

  out.w_thr.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<int> pool;
  for (Level i = 1; i <= k; ++i) {
    const auto& joining = positive[static_cast<std::size_t>(i - 1)];
    pool.insert(pool.end(), joining.begin(), joining.end());
    std::sort(pool.begin(), pool.end(), lower);

    IterationRecord rec;
    rec.level = i;
    rec.pool_size = static_cast<int>(pool.size());
    rec.removals = trace.removals.r[static_cast<std::size_t>(i - 1)];
    const auto cut = static_cast<std::ptrdiff_t>(rec.removals);
    if (rec.removals > 0) {
      rec.w_threshold = w[static_cast<std::size_t>(pool[static_cast<std::size_t>(cut - 1)])];
      rec.removed.assign(pool.begin(), pool.begin() + cut);
      pool.erase(pool.begin(), pool.begin() + cut);
    }
    out.w_thr[static_cast<std::size_t>(i - 1)] = rec.w_threshold;
    trace.iterations.push_back(std::move(rec));
  }

  std::sort(pool.begin(), pool.end());
  out.winners = pool;
  std::vector<Survivor> survivors;
  for (int l : pool) survivors.push_back({l, profile.levels[static_cast<std::size_t>(l)]});
  out.matrix = assign_goods(survivors, structure, n);
  return out;
}

// theta at which a consumer with this model, reporting `level`, has virtual
// valuation max{0, w_thr[level..k]}.
inline ThresholdValue valuation_threshold(const ConsumerTypeModel& model, std::span<const double> w_thr,
                                          Level level) {
  model.check_level(level);
  if (static_cast<int>(w_thr.size()) != model.levels()) {
    throw DomainError("threshold vector length differs from the model's level count");
  }
  double target = 0.0;
  for (std::size_t j = static_cast<std::size_t>(level - 1); j < w_thr.size(); ++j) {
    target = std::max(target, w_thr[j]);
  }
  if (target > virtual_valuation(model, level, model.support_max())) {
    return {model.support_max(), false};
  }
  return {inverse_virtual_valuation(model, level, target), true};
}

inline ThresholdValue valuation_threshold(std::span<const ConsumerTypeModel> models,
                                          std::span<const double> w_thr, int consumer, Level level) {
  if (consumer < 0 || static_cast<std::size_t>(consumer) >= models.size()) {
    throw DomainError("consumer " + std::to_string(consumer) + " has no model");
  }
  return valuation_threshold(models[static_cast<std::size_t>(consumer)], w_thr, level);
}

// Threshold allocation plus threshold payments; non-winners pay exactly 0.
inline AuctionOutcome run_auction(std::span<const ConsumerTypeModel> models,
                                  const FlexibilityStructure& structure, const TypeProfile& profile,
                                  TieBreak tie_break = TieBreak::index, Rng* rng = nullptr) {
  Allocation alloc = allocate(models, structure, profile, tie_break, rng);
  AuctionOutcome out;
  out.payments.assign(profile.size(), 0.0);
  for (int l : alloc.winners) {
    const auto ul = static_cast<std::size_t>(l);
    const ThresholdValue thr = valuation_threshold(models, alloc.w_thr, l, profile.levels[ul]);
    // A winner's own valuation already clears the threshold; the clamp only
    // absorbs bisection error so ex post utility is never negative.
    const double pay = std::min(thr.theta, profile.valuations[ul]);
    out.payments[ul] = pay;
    out.winner_thresholds.push_back(thr.theta);
  }
  out.allocation = std::move(alloc.matrix);
  out.winners = std::move(alloc.winners);
  out.w_thr = std::move(alloc.w_thr);
  out.trace = std::move(alloc.trace);
  return out;
}

constexpr double kCriticalBidTolerance = 1e-9;

// Flip point of "consumer wins" as its own valuation report moves over the
// support, other reports fixed. Bisection relies on the allocation being
// monotone in the own report. Returns the theta_max sentinel with
// can_win = false when the consumer loses even at theta_max.
inline ThresholdValue critical_bid(std::span<const ConsumerTypeModel> models,
                                   const FlexibilityStructure& structure, const TypeProfile& profile,
                                   int consumer, double tolerance = kCriticalBidTolerance) {
  detail::check_instance(models, structure, profile);
  if (consumer < 0 || static_cast<std::size_t>(consumer) >= profile.size()) {
    throw DomainError("consumer " + std::to_string(consumer) + " not in profile");
  }
  const auto& model = models[static_cast<std::size_t>(consumer)];
  TypeProfile probe = profile;
  auto wins_at = [&](double s) {
    probe.valuations[static_cast<std::size_t>(consumer)] = s;
    return allocate(models, structure, probe).wins(consumer);
  };
  double lose = model.support_min();
  double win = model.support_max();
  if (!wins_at(win)) return {win, false};
  if (wins_at(lose)) return {lose, true};
  while (win - lose > tolerance) {
    const double mid = 0.5 * (lose + win);
    if (mid <= lose || mid >= win) break;
    (wins_at(mid) ? win : lose) = mid;
  }
  return {0.5 * (lose + win), true};
}

}  // namespace flexauction
