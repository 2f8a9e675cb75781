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

// Nested flexibility sets B_1 c B_2 c ... c B_k, encoded by their increments
// m_l = |B_l \ B_{l-1}|. Goods are numbered 1..M so that the first |B_l|
// goods form B_l.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flexauction/dist.hpp"
#include "flexauction/errors.hpp"

namespace flexauction {

class FlexibilityStructure {
 public:
  explicit FlexibilityStructure(std::vector<int> increments) : m_(std::move(increments)) {
    if (m_.empty()) throw DomainError("flexibility structure needs at least one level");
    int total = 0;
    for (int v : m_) {
      if (v < 0) throw DomainError("supply increments must be nonnegative");
      total += v;
      prefix_.push_back(total);
    }
  }

  int levels() const { return static_cast<int>(m_.size()); }
  int goods() const { return prefix_.back(); }
  std::span<const int> increments() const { return m_; }

  // |B_l|
  int set_size(Level level) const {
    if (level < 1 || level > levels()) {
      throw DomainError("level " + std::to_string(level) + " outside 1.." + std::to_string(levels()));
    }
    return prefix_[static_cast<std::size_t>(level - 1)];
  }

  // Goods are 1-based.
  bool contains(Level level, int good) const { return good >= 1 && good <= set_size(level); }

  bool operator==(const FlexibilityStructure&) const = default;

 private:
  std::vector<int> m_;
  std::vector<int> prefix_;
};

// n_l = number of consumers reporting level l.
struct DemandProfile {
  std::vector<int> n;

  static DemandProfile from_levels(std::span<const Level> levels, int k) {
    DemandProfile d{std::vector<int>(static_cast<std::size_t>(k), 0)};
    for (Level l : levels) {
      if (l < 1 || l > k) throw DomainError("level " + std::to_string(l) + " outside 1.." + std::to_string(k));
      ++d.n[static_cast<std::size_t>(l - 1)];
    }
    return d;
  }

  int total() const { return std::accumulate(n.begin(), n.end(), 0); }
};

struct RemovalPlan {
  std::vector<int> r;
  int total = 0;
};

// Dense N x M 0/1 matrix; A(i, j) = 1 when consumer i receives good j.
// Consumers are 0-based rows, goods 1-based columns.
class AllocationMatrix {
 public:
  AllocationMatrix() = default;
  AllocationMatrix(int consumers, int goods)
      : rows_(consumers), cols_(goods), cells_(static_cast<std::size_t>(consumers * goods), 0) {}

  int consumers() const { return rows_; }
  int goods() const { return cols_; }

  bool at(int consumer, int good) const { return cells_[index(consumer, good)] != 0; }
  void set(int consumer, int good, bool value = true) { cells_[index(consumer, good)] = value ? 1 : 0; }

  int row_sum(int consumer) const {
    int s = 0;
    for (int g = 1; g <= cols_; ++g) s += at(consumer, g);
    return s;
  }
  int column_sum(int good) const {
    int s = 0;
    for (int c = 0; c < rows_; ++c) s += at(c, good);
    return s;
  }

  // Membership in the feasible set: every row and every column sums to <= 1.
  bool is_feasible() const {
    for (int c = 0; c < rows_; ++c) {
      if (row_sum(c) > 1) return false;
    }
    for (int g = 1; g <= cols_; ++g) {
      if (column_sum(g) > 1) return false;
    }
    return true;
  }

  // First good held by the consumer, if any.
  std::optional<int> good_of(int consumer) const {
    for (int g = 1; g <= cols_; ++g) {
      if (at(consumer, g)) return g;
    }
    return std::nullopt;
  }

  // a(level) q_i^T: 1 when the consumer holds a good inside B_level.
  bool served_within(int consumer, Level level, const FlexibilityStructure& s) const {
    const int limit = std::min(cols_, s.set_size(level));
    for (int g = 1; g <= limit; ++g) {
      if (at(consumer, g)) return true;
    }
    return false;
  }

  bool operator==(const AllocationMatrix&) const = default;

 private:
  std::size_t index(int consumer, int good) const {
    if (consumer < 0 || consumer >= rows_ || good < 1 || good > cols_) {
      throw DomainError("allocation index (" + std::to_string(consumer) + ", " + std::to_string(good) +
                        ") outside " + std::to_string(rows_) + " x " + std::to_string(cols_));
    }
    return static_cast<std::size_t>(consumer * cols_ + good - 1);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> cells_;
};

inline void check_same_levels(std::span<const int> n, std::span<const int> m) {
  if (n.size() != m.size()) {
    throw DomainError("demand profile has " + std::to_string(n.size()) + " levels, supply has " +
                      std::to_string(m.size()));
  }
}

// n weakly submajorized by m: every prefix sum of n is at most that of m.
inline bool is_adequate(std::span<const int> n, std::span<const int> m) {
  check_same_levels(n, m);
  long long demand = 0;
  long long supply = 0;
  for (std::size_t l = 0; l < n.size(); ++l) {
    demand += n[l];
    supply += m[l];
    if (demand > supply) return false;
  }
  return true;
}

inline bool is_adequate(const DemandProfile& demand, const FlexibilityStructure& structure) {
  return is_adequate(demand.n, structure.increments());
}

// Fewest consumers to drop, per class, so that the rest is adequate:
// r_j = (sum_{l<=j} (n_l - m_l) - sum_{l<j} r_l)^+.
inline RemovalPlan minimal_removals(std::span<const int> n, std::span<const int> m) {
  check_same_levels(n, m);
  RemovalPlan plan{std::vector<int>(n.size(), 0), 0};
  long long excess = 0;
  for (std::size_t j = 0; j < n.size(); ++j) {
    excess += static_cast<long long>(n[j]) - m[j];
    const long long r = std::max(0LL, excess - plan.total);
    plan.r[j] = static_cast<int>(r);
    plan.total += static_cast<int>(r);
  }
  return plan;
}

inline RemovalPlan minimal_removals(const DemandProfile& demand, const FlexibilityStructure& structure) {
  return minimal_removals(demand.n, structure.increments());
}

struct Survivor {
  int consumer_id = 0;
  Level level = 1;
};

// Serve an adequate set of consumers: order them by level (ties by id) and
// hand out goods 1, 2, ... in that order. Throws ContractError when the
// survivors' demand profile is not adequate.
inline AllocationMatrix assign_goods(std::span<const Survivor> survivors,
                                     const FlexibilityStructure& structure, int consumer_count) {
  const DemandProfile demand = [&] {
    std::vector<Level> levels;
    for (const Survivor& s : survivors) levels.push_back(s.level);
    return DemandProfile::from_levels(levels, structure.levels());
  }();
  if (!is_adequate(demand, structure)) {
    throw ContractError("survivors' demand profile is not adequate for the supply profile");
  }
  std::vector<Survivor> order(survivors.begin(), survivors.end());
  std::sort(order.begin(), order.end(), [](const Survivor& a, const Survivor& b) {
    return a.level != b.level ? a.level < b.level : a.consumer_id < b.consumer_id;
  });
  AllocationMatrix a(consumer_count, structure.goods());
  int good = 0;
  for (const Survivor& s : order) a.set(s.consumer_id, ++good);
  return a;
}

}  // namespace flexauction
