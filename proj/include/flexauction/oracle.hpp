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

// Exhaustive reference solvers. They are exponential by construction and
// guarded by explicit size limits; use them to check the threshold
// mechanism on small instances, never to run auctions.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flexauction/errors.hpp"
#include "flexauction/flex.hpp"
#include "flexauction/mechanism.hpp"

namespace flexauction {

struct OracleResult {
  double objective = 0.0;
  std::vector<std::vector<int>> argmax_sets;  // winner sets within kOracleTieTolerance of the optimum
  std::uint64_t enumerated = 0;
};

constexpr double kOracleTieTolerance = 1e-12;
constexpr std::uint64_t kOracleCapacity = 1'000'000;
constexpr int kOracleMaxConsumers = 12;

// max over feasible winner sets S of sum_{l in S} w_l. A set is feasible iff
// its demand profile is adequate, which for nested sets is equivalent to some
// feasible allocation matrix serving every member inside its set.
inline OracleResult brute_force_allocation(std::span<const double> w, std::span<const Level> levels,
                                           const FlexibilityStructure& structure) {
  if (w.size() != levels.size()) throw DomainError("virtual valuations and levels differ in length");
  const int n = static_cast<int>(w.size());
  if (n > kOracleMaxConsumers || (std::uint64_t{1} << n) > kOracleCapacity) {
    throw CapacityError("brute-force allocation limited to " + std::to_string(kOracleMaxConsumers) +
                        " consumers, got " + std::to_string(n));
  }
  const int k = structure.levels();
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::vector<double> value(subsets, 0.0);
  std::vector<char> feasible(subsets, 0);
  std::vector<int> demand(static_cast<std::size_t>(k));

  OracleResult out;
  bool any = false;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    std::fill(demand.begin(), demand.end(), 0);
    double sum = 0.0;
    for (int l = 0; l < n; ++l) {
      if (mask >> l & 1U) {
        const Level b = levels[static_cast<std::size_t>(l)];
        if (b < 1 || b > k) throw DomainError("level " + std::to_string(b) + " outside 1.." + std::to_string(k));
        ++demand[static_cast<std::size_t>(b - 1)];
        sum += w[static_cast<std::size_t>(l)];
      }
    }
    ++out.enumerated;
    if (!is_adequate(demand, structure.increments())) continue;
    feasible[mask] = 1;
    value[mask] = sum;
    if (!any || sum > out.objective) out.objective = sum;
    any = true;
  }
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    if (feasible[mask] && value[mask] >= out.objective - kOracleTieTolerance) {
      std::vector<int> set;
      for (int l = 0; l < n; ++l) {
        if (mask >> l & 1U) set.push_back(l);
      }
      out.argmax_sets.push_back(std::move(set));
    }
  }
  return out;
}

// Same optimum, found by enumerating allocation matrices directly: every
// partial injection of consumers into goods, scored by
// sum_i a(b_i) A_i^T w_i. Limited to N, M <= 4.
inline OracleResult brute_force_allocation_matrices(std::span<const double> w, std::span<const Level> levels,
                                                    const FlexibilityStructure& structure) {
  if (w.size() != levels.size()) throw DomainError("virtual valuations and levels differ in length");
  const int n = static_cast<int>(w.size());
  const int m = structure.goods();
  if (n > 4 || m > 4) throw CapacityError("matrix enumeration limited to N, M <= 4");

  OracleResult out;
  std::vector<int> good(static_cast<std::size_t>(n), 0);  // 0 = nothing
  std::vector<char> taken(static_cast<std::size_t>(m + 1), 0);
  bool any = false;
  std::vector<std::pair<double, std::vector<int>>> scored;

  auto score = [&] {
    double sum = 0.0;
    std::vector<int> served;
    for (int l = 0; l < n; ++l) {
      const int g = good[static_cast<std::size_t>(l)];
      if (g != 0 && structure.contains(levels[static_cast<std::size_t>(l)], g)) {
        sum += w[static_cast<std::size_t>(l)];
        served.push_back(l);
      }
    }
    ++out.enumerated;
    if (!any || sum > out.objective) out.objective = sum;
    any = true;
    scored.emplace_back(sum, std::move(served));
  };
  auto recurse = [&](auto&& self, int l) -> void {
    if (l == n) {
      score();
      return;
    }
    good[static_cast<std::size_t>(l)] = 0;
    self(self, l + 1);
    for (int g = 1; g <= m; ++g) {
      if (taken[static_cast<std::size_t>(g)]) continue;
      taken[static_cast<std::size_t>(g)] = 1;
      good[static_cast<std::size_t>(l)] = g;
      self(self, l + 1);
      taken[static_cast<std::size_t>(g)] = 0;
    }
    good[static_cast<std::size_t>(l)] = 0;
  };
  recurse(recurse, 0);

  for (auto& [sum, set] : scored) {
    if (sum >= out.objective - kOracleTieTolerance &&
        std::find(out.argmax_sets.begin(), out.argmax_sets.end(), set) == out.argmax_sets.end()) {
      out.argmax_sets.push_back(set);
    }
  }
  std::sort(out.argmax_sets.begin(), out.argmax_sets.end());
  return out;
}

// Minimum of sum(n - n~) over integer 0 <= n~ <= n with n~ adequate for m.
inline int brute_force_removals(std::span<const int> n, std::span<const int> m) {
  check_same_levels(n, m);
  std::uint64_t space = 1;
  for (int v : n) {
    if (v < 0) throw DomainError("demand counts must be nonnegative");
    space *= static_cast<std::uint64_t>(v) + 1;
    if (space > kOracleCapacity) throw CapacityError("removal enumeration exceeds 10^6 candidates");
  }
  const int total = [&] {
    int t = 0;
    for (int v : n) t += v;
    return t;
  }();
  std::vector<int> kept(n.size(), 0);
  int best = total;
  while (true) {
    if (is_adequate(kept, m)) {
      int s = 0;
      for (int v : kept) s += v;
      best = std::min(best, total - s);
    }
    std::size_t d = 0;
    while (d < kept.size() && kept[d] == n[d]) kept[d++] = 0;
    if (d == kept.size()) break;
    ++kept[d];
  }
  return best;
}

struct IntegralPayment {
  double payment = 0.0;
  int steps = 0;  // changes of the win indicator on [theta_min, theta_l]
};

// t_l = theta_l * [l wins] - integral_{theta_min}^{theta_l} [l wins at s] ds,
// with the 0/1 integrand evaluated by rerunning the allocation. The interval
// is scanned on a 64-cell grid and every change of the indicator is located
// by bisection, so the integral is exact up to the bisection tolerance as
// long as no cell hides two changes.
inline IntegralPayment payment_by_integral(std::span<const ConsumerTypeModel> models,
                                           const FlexibilityStructure& structure, const TypeProfile& profile,
                                           int consumer) {
  detail::check_instance(models, structure, profile);
  if (consumer < 0 || static_cast<std::size_t>(consumer) >= profile.size()) {
    throw DomainError("consumer " + std::to_string(consumer) + " not in profile");
  }
  const auto idx = static_cast<std::size_t>(consumer);
  const Level level = profile.levels[idx];
  const double lo = models[idx].support_min();
  const double theta = profile.valuations[idx];
  TypeProfile probe = profile;
  auto served = [&](double s) {
    probe.valuations[idx] = s;
    const Allocation a = allocate(models, structure, probe);
    return a.matrix.served_within(consumer, level, structure);
  };

  constexpr int kCells = 64;
  constexpr double kTol = 1e-12;
  IntegralPayment out;
  double integral = 0.0;
  double left = lo;
  bool left_in = served(lo);
  for (int j = 1; j <= kCells; ++j) {
    const double right = j == kCells ? theta : lo + (theta - lo) * j / kCells;
    const bool right_in = served(right);
    if (left_in == right_in) {
      if (left_in) integral += right - left;
    } else {
      double a = left;
      double b = right;
      while (b - a > kTol) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        (served(mid) == left_in ? a : b) = mid;
      }
      const double flip = 0.5 * (a + b);
      integral += right_in ? right - flip : flip - left;
      ++out.steps;
    }
    left = right;
    left_in = right_in;
  }
  out.payment = (served(theta) ? theta : 0.0) - integral;
  return out;
}

}  // namespace flexauction
