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

// Mechanisms that are known NOT to be incentive compatible. They exist so the
// verifiers can be shown to reject something.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "flexauction/flex.hpp"
#include "flexauction/mechanism.hpp"
#include "flexauction/verify.hpp"

namespace flexauction {

// Highest reported valuation wins a good from its reported set and pays the
// second-highest reported valuation (the reserve if it is alone). Everybody
// else, in decreasing order of reported valuation, is served if a good of
// their reported set is still available and pays the fixed reserve. Ties go
// to the lower consumer id.
//
// With B_1 = {1}, B_2 = {1, 2}, a bidder of type (2, 2) facing a bidder of
// type (1, 2) nets 2 - 1 = 1 by reporting truthfully and 2 - 0.5 = 1.5 by
// reporting (0.5, 2).
inline AuctionOutcome naive_second_price(const FlexibilityStructure& structure, const TypeProfile& profile,
                                         double reserve = 0.5) {
  const int n = static_cast<int>(profile.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return profile.valuations[static_cast<std::size_t>(a)] > profile.valuations[static_cast<std::size_t>(b)];
  });

  AuctionOutcome out;
  out.payments.assign(static_cast<std::size_t>(n), 0.0);
  out.w_thr.assign(static_cast<std::size_t>(structure.levels()), 0.0);
  std::vector<int> demand(static_cast<std::size_t>(structure.levels()), 0);
  std::vector<Survivor> served;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int l = order[pos];
    const Level b = profile.levels[static_cast<std::size_t>(l)];
    ++demand[static_cast<std::size_t>(b - 1)];
    if (!is_adequate(demand, structure.increments())) {
      --demand[static_cast<std::size_t>(b - 1)];
      continue;
    }
    served.push_back({l, b});
    if (pos == 0) {
      out.payments[static_cast<std::size_t>(l)] =
          order.size() > 1 ? profile.valuations[static_cast<std::size_t>(order[1])] : reserve;
    } else {
      out.payments[static_cast<std::size_t>(l)] = reserve;
    }
  }
  out.allocation = assign_goods(served, structure, n);
  for (const Survivor& s : served) out.winners.push_back(s.consumer_id);
  std::sort(out.winners.begin(), out.winners.end());
  return out;
}

inline Mechanism naive_second_price_mechanism(const FlexibilityStructure& structure, double reserve = 0.5) {
  return [structure, reserve](const TypeProfile& p) { return naive_second_price(structure, p, reserve); };
}

// The optimal allocation with a broken payment rule: every winner pays its
// reserve price regardless of competition.
inline Mechanism reserve_always_mechanism(const Economy& economy) {
  return [models = economy.models, structure = economy.structure](const TypeProfile& p) {
    AuctionOutcome o = run_auction(models, structure, p);
    for (std::size_t i = 0; i < o.winners.size(); ++i) {
      const auto l = static_cast<std::size_t>(o.winners[i]);
      o.payments[l] = reserve_price(models[l], p.levels[l]);
    }
    return o;
  };
}

}  // namespace flexauction
