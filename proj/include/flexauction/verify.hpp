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

// Monte Carlo checks of the properties an optimal mechanism must have:
// Bayesian incentive compatibility, interim monotonicity, the interim payment
// identity, ex post individual rationality and revenue = virtual surplus.
//
// All estimates use common random numbers: sample s draws every consumer's
// type from stream (seed, s), so estimates for different reports of the same
// consumer see identical opponents and are compared through their per-sample
// differences.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flexauction/dist.hpp"
#include "flexauction/errors.hpp"
#include "flexauction/flex.hpp"
#include "flexauction/mechanism.hpp"
#include "flexauction/oracle.hpp"
#include "flexauction/parallel.hpp"
#include "flexauction/random.hpp"

namespace flexauction {

struct Economy {
  std::vector<ConsumerTypeModel> models;
  FlexibilityStructure structure;

  int consumers() const { return static_cast<int>(models.size()); }
};

using Mechanism = std::function<AuctionOutcome(const TypeProfile&)>;

inline Mechanism optimal_mechanism(const Economy& economy, TieBreak tie_break = TieBreak::index,
                                   std::uint64_t tie_seed = 0) {
  return [models = economy.models, structure = economy.structure, tie_break,
          tie_seed](const TypeProfile& profile) {
    if (tie_break == TieBreak::random) {
      // Seed from the profile so the mechanism stays a pure function.
      std::uint64_t h = tie_seed;
      for (double v : profile.valuations) {
        std::uint64_t bits = 0;
        static_assert(sizeof bits == sizeof v);
        std::memcpy(&bits, &v, sizeof v);
        h = splitmix64(h ^ bits);
      }
      Rng rng = stream_rng(h, profile.size());
      return run_auction(models, structure, profile, tie_break, &rng);
    }
    return run_auction(models, structure, profile);
  };
}

// Running mean and variance (Welford) with an order-dependent but
// deterministic merge.
class Moments {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  void merge(const Moments& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Report {
  Valuation valuation = 0.0;
  Level level = 1;
};

struct InterimEstimate {
  double q_bar = 0.0;  // P(served inside the reported set)
  double t_bar = 0.0;  // expected payment
  double q_stderr = 0.0;
  double t_stderr = 0.0;
  std::uint64_t samples = 0;
};

struct VerificationReport {
  std::string check;
  bool passed = true;
  double worst_margin = 0.0;  // smallest mean margin; negative points toward a violation
  double worst_z = std::numeric_limits<double>::quiet_NaN();  // smallest margin / stderr, NaN if no noisy comparison
  std::string worst_case;
  std::uint64_t comparisons = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
};

constexpr double kZThreshold = 3.0;
constexpr double kExactTolerance = 1e-12;

inline std::string fnv1a_digest(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace detail {

inline void require_consumer(const Economy& e, int consumer) {
  if (consumer < 0 || consumer >= e.consumers()) {
    throw DomainError("consumer " + std::to_string(consumer) + " not in economy of " +
                      std::to_string(e.consumers()));
  }
}

inline TypeProfile draw_profile(const Economy& e, std::uint64_t seed, std::uint64_t sample) {
  Rng rng = stream_rng(seed, sample);
  TypeProfile p;
  p.valuations.reserve(e.models.size());
  p.levels.reserve(e.models.size());
  for (const auto& m : e.models) {
    const TypeDraw d = sample_type(m, rng);
    p.valuations.push_back(d.valuation);
    p.levels.push_back(d.level);
  }
  return p;
}

inline std::string describe(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Accumulates one-sided comparisons "mean >= 0 up to 3 stderr".
class ComparisonLog {
 public:
  explicit ComparisonLog(VerificationReport& r) : r_(r) {}

  void lower_bound(const Moments& m, const std::string& where, double slack = 0.0) {
    const double mean = m.mean() + slack;
    const double se = m.std_error();
    ++r_.comparisons;
    bool ok = false;
    double key = 0.0;
    if (se > 0.0) {
      key = mean / se;
      ok = key >= -kZThreshold;
      if (std::isnan(r_.worst_z) || key < r_.worst_z) r_.worst_z = key;
    } else {
      ok = mean >= -kExactTolerance;
      key = ok ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    if (first_ || mean < r_.worst_margin) r_.worst_margin = mean;
    if (first_ || key < worst_key_ || (key == worst_key_ && mean < worst_mean_)) {
      worst_key_ = key;
      worst_mean_ = mean;
      r_.worst_case = where;
    }
    first_ = false;
    if (!ok) r_.passed = false;
  }

  // |mean| <= 3 stderr + slack.
  void two_sided(const Moments& m, const std::string& where, double slack = 0.0) {
    // margin = slack - |mean|
    const double mean = m.mean();
    const double se = m.std_error();
    ++r_.comparisons;
    const double margin = slack - std::abs(mean);
    bool ok = false;
    double key = 0.0;
    if (se > 0.0) {
      key = margin / se;
      ok = key >= -kZThreshold;
      if (std::isnan(r_.worst_z) || key < r_.worst_z) r_.worst_z = key;
    } else {
      ok = margin >= -kExactTolerance;
      key = ok ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    if (first_ || margin < r_.worst_margin) r_.worst_margin = margin;
    if (first_ || key < worst_key_ || (key == worst_key_ && margin < worst_mean_)) {
      worst_key_ = key;
      worst_mean_ = margin;
      r_.worst_case = where;
    }
    first_ = false;
    if (!ok) r_.passed = false;
  }

 private:
  VerificationReport& r_;
  bool first_ = true;
  double worst_key_ = 0.0;
  double worst_mean_ = 0.0;
};

}  // namespace detail

// Outcome of one consumer under many reports, sample by sample, with the
// other consumers' types drawn from their models (common random numbers).
class InterimTable {
 public:
  InterimTable(const Economy& economy, const Mechanism& mechanism, int consumer, std::vector<Report> reports,
               std::size_t samples, std::uint64_t seed, int workers = 1)
      : structure_(economy.structure), reports_(std::move(reports)), samples_(samples) {
    detail::require_consumer(economy, consumer);
    const auto& model = economy.models[static_cast<std::size_t>(consumer)];
    for (const Report& r : reports_) {
      model.check_level(r.level);
      model.check_valuation(r.valuation);
    }
    const std::size_t width = reports_.size();
    goods_.assign(samples_ * width, 0);
    payments_.assign(samples_ * width, 0.0);
    const auto idx = static_cast<std::size_t>(consumer);
    for_each_chunk(samples_, 1024, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t s = begin; s < end; ++s) {
        TypeProfile p = detail::draw_profile(economy, seed, s);
        for (std::size_t r = 0; r < width; ++r) {
          p.valuations[idx] = reports_[r].valuation;
          p.levels[idx] = reports_[r].level;
          const AuctionOutcome o = mechanism(p);
          goods_[s * width + r] = o.allocation.good_of(consumer).value_or(0);
          payments_[s * width + r] = o.payments[idx];
        }
      }
    });
  }

  std::size_t samples() const { return samples_; }
  std::span<const Report> reports() const { return reports_; }

  // a(level) q^T for report r in sample s.
  bool served(std::size_t s, std::size_t r, Level level) const {
    const int g = goods_[s * reports_.size() + r];
    return g != 0 && g <= structure_.set_size(level);
  }
  double payment(std::size_t s, std::size_t r) const { return payments_[s * reports_.size() + r]; }

  // Utility of a consumer of true type (theta, level) from report r.
  double utility(std::size_t s, std::size_t r, Valuation theta, Level level) const {
    return theta * (served(s, r, level) ? 1.0 : 0.0) - payment(s, r);
  }

  InterimEstimate estimate(std::size_t r) const {
    Moments q;
    Moments t;
    for (std::size_t s = 0; s < samples_; ++s) {
      q.add(served(s, r, reports_[r].level) ? 1.0 : 0.0);
      t.add(payment(s, r));
    }
    return {q.mean(), t.mean(), q.std_error(), t.std_error(), samples_};
  }

  std::size_t index_of(Valuation v, Level c) const {
    for (std::size_t r = 0; r < reports_.size(); ++r) {
      if (reports_[r].valuation == v && reports_[r].level == c) return r;
    }
    throw DomainError("report (" + detail::describe(v) + ", " + std::to_string(c) + ") not tabulated");
  }

 private:
  FlexibilityStructure structure_;
  std::vector<Report> reports_;
  std::size_t samples_;
  std::vector<int> goods_;
  std::vector<double> payments_;
};

constexpr std::size_t kMinInterimSamples = 1000;

inline InterimEstimate estimate_interim(const Economy& economy, const Mechanism& mechanism, int consumer,
                                        Report report, std::size_t samples, std::uint64_t seed,
                                        int workers = 1) {
  if (samples < kMinInterimSamples) throw DomainError("interim estimates need at least 1000 samples");
  InterimTable table(economy, mechanism, consumer, {report}, samples, seed, workers);
  return table.estimate(0);
}

// `points` interior points theta_min + (theta_max - theta_min) j / (points + 1);
// the default 9 gives the support deciles.
inline std::vector<Valuation> interior_grid(const ConsumerTypeModel& model, int points = 9) {
  if (points < 1) throw DomainError("valuation grid needs at least one point");
  std::vector<Valuation> g;
  const double width = model.support_max() - model.support_min();
  for (int j = 1; j <= points; ++j) g.push_back(model.support_min() + width * j / (points + 1));
  return g;
}

namespace detail {

inline std::vector<Report> grid_reports(std::span<const Valuation> valuations, int levels) {
  std::vector<Report> reports;
  for (Level c = 1; c <= levels; ++c) {
    for (Valuation v : valuations) reports.push_back({v, c});
  }
  return reports;
}

inline std::string params_digest(const std::string& check, int consumer, std::span<const Valuation> grid,
                                 std::size_t samples, std::uint64_t seed) {
  std::ostringstream os;
  os << std::setprecision(17) << check << '|' << consumer << '|' << samples << '|' << seed;
  for (double v : grid) os << '|' << v;
  return fnv1a_digest(os.str());
}

inline VerificationReport bic_from_table(const InterimTable& table, std::span<const Valuation> grid, int levels,
                                         int consumer, const std::string& digest, std::uint64_t seed) {
  VerificationReport report;
  report.check = "bic";
  report.samples = table.samples();
  report.seed = seed;
  report.config_digest = digest;
  detail::ComparisonLog log(report);
  for (Level b = 1; b <= levels; ++b) {
    for (Valuation theta : grid) {
      const std::size_t truth = table.index_of(theta, b);
      for (Level c = 1; c <= b; ++c) {
        for (Valuation r : grid) {
          const std::size_t lie = table.index_of(r, c);
          Moments gain;
          for (std::size_t s = 0; s < table.samples(); ++s) {
            gain.add(table.utility(s, truth, theta, b) - table.utility(s, lie, theta, b));
          }
          log.lower_bound(gain, "consumer " + std::to_string(consumer) + " true (" + describe(theta) + ", " +
                                    std::to_string(b) + ") vs report (" + describe(r) + ", " +
                                    std::to_string(c) + ")");
        }
      }
    }
  }
  return report;
}

inline VerificationReport monotonicity_from_table(const InterimTable& table, std::span<const Valuation> grid,
                                                  int levels, int consumer, const std::string& digest,
                                                  std::uint64_t seed) {
  VerificationReport report;
  report.check = "monotonicity";
  report.samples = table.samples();
  report.seed = seed;
  report.config_digest = digest;
  detail::ComparisonLog log(report);
  for (Level c = 1; c <= levels; ++c) {
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
      const std::size_t a = table.index_of(grid[j], c);
      const std::size_t b = table.index_of(grid[j + 1], c);
      Moments d;
      for (std::size_t s = 0; s < table.samples(); ++s) {
        d.add((table.served(s, b, c) ? 1.0 : 0.0) - (table.served(s, a, c) ? 1.0 : 0.0));
      }
      log.lower_bound(d, "consumer " + std::to_string(consumer) + " level " + std::to_string(c) + ": r " +
                             describe(grid[j]) + " -> " + describe(grid[j + 1]));
    }
  }
  for (Valuation r : grid) {
    for (Level c = 1; c < levels; ++c) {
      const std::size_t a = table.index_of(r, c);
      const std::size_t b = table.index_of(r, c + 1);
      Moments d;
      for (std::size_t s = 0; s < table.samples(); ++s) {
        d.add((table.served(s, b, c + 1) ? 1.0 : 0.0) - (table.served(s, a, c) ? 1.0 : 0.0));
      }
      log.lower_bound(d, "consumer " + std::to_string(consumer) + " r " + describe(r) + ": level " +
                             std::to_string(c) + " -> " + std::to_string(c + 1));
    }
  }
  return report;
}

}  // namespace detail

// No report (r, c) with c <= b on the grid beats truthful reporting for any
// true type (theta, b) on the grid by more than 3 standard errors of the
// paired utility difference.
inline VerificationReport check_bic(const Economy& economy, const Mechanism& mechanism, int consumer,
                                    std::span<const Valuation> grid, std::size_t samples, std::uint64_t seed,
                                    int workers = 1) {
  detail::require_consumer(economy, consumer);
  const int k = economy.structure.levels();
  InterimTable table(economy, mechanism, consumer, detail::grid_reports(grid, k), samples, seed, workers);
  return detail::bic_from_table(table, grid, k, consumer, detail::params_digest("bic", consumer, grid, samples, seed),
                                seed);
}

// q_bar nondecreasing in the valuation report at each level and in the level
// at each valuation, up to 3 standard errors of the paired differences.
inline VerificationReport check_monotonicity(const Economy& economy, const Mechanism& mechanism, int consumer,
                                             std::span<const Valuation> grid, std::size_t samples,
                                             std::uint64_t seed, int workers = 1) {
  detail::require_consumer(economy, consumer);
  const int k = economy.structure.levels();
  InterimTable table(economy, mechanism, consumer, detail::grid_reports(grid, k), samples, seed, workers);
  return detail::monotonicity_from_table(table, grid, k, consumer,
                                         detail::params_digest("monotonicity", consumer, grid, samples, seed), seed);
}

// Both checks from one shared table; same results as the separate calls.
inline std::pair<VerificationReport, VerificationReport> check_bic_and_monotonicity(
    const Economy& economy, const Mechanism& mechanism, int consumer, std::span<const Valuation> grid,
    std::size_t samples, std::uint64_t seed, int workers = 1) {
  detail::require_consumer(economy, consumer);
  const int k = economy.structure.levels();
  InterimTable table(economy, mechanism, consumer, detail::grid_reports(grid, k), samples, seed, workers);
  return {detail::bic_from_table(table, grid, k, consumer,
                                 detail::params_digest("bic", consumer, grid, samples, seed), seed),
          detail::monotonicity_from_table(table, grid, k, consumer,
                                          detail::params_digest("monotonicity", consumer, grid, samples, seed),
                                          seed)};
}

// T(theta_min, c) = 0 for every level c.
inline VerificationReport check_boundary_payment(const Economy& economy, const Mechanism& mechanism, int consumer,
                                                 std::size_t samples, std::uint64_t seed, int workers = 1) {
  detail::require_consumer(economy, consumer);
  const auto& model = economy.models[static_cast<std::size_t>(consumer)];
  const int k = economy.structure.levels();
  const std::vector<Valuation> grid{model.support_min()};
  InterimTable table(economy, mechanism, consumer, detail::grid_reports(grid, k), samples, seed, workers);
  VerificationReport report;
  report.check = "boundary_payment";
  report.samples = samples;
  report.seed = seed;
  report.config_digest = detail::params_digest(report.check, consumer, grid, samples, seed);
  detail::ComparisonLog log(report);
  for (Level c = 1; c <= k; ++c) {
    Moments t;
    const std::size_t r = table.index_of(model.support_min(), c);
    for (std::size_t s = 0; s < samples; ++s) t.add(table.payment(s, r));
    log.two_sided(t, "consumer " + std::to_string(consumer) + " level " + std::to_string(c));
  }
  return report;
}

// T(r, c) = r Q(r, c) - integral_{theta_min}^{r} Q(s, c) ds at every node of
// a uniform grid with `cells` cells, the integral taken by the trapezoid rule
// on the same grid. The allowed deviation is 3 standard errors plus the
// trapezoid error bound for a nondecreasing integrand, h/2 (Q(r) - Q(theta_min)).
inline VerificationReport check_payment_identity(const Economy& economy, const Mechanism& mechanism, int consumer,
                                                 int cells, std::size_t samples, std::uint64_t seed,
                                                 int workers = 1) {
  detail::require_consumer(economy, consumer);
  if (cells < 1) throw DomainError("payment identity needs at least one grid cell");
  const auto& model = economy.models[static_cast<std::size_t>(consumer)];
  const int k = economy.structure.levels();
  const double lo = model.support_min();
  const double h = (model.support_max() - lo) / cells;
  std::vector<Valuation> grid;
  for (int j = 0; j <= cells; ++j) grid.push_back(j == cells ? model.support_max() : lo + h * j);
  InterimTable table(economy, mechanism, consumer, detail::grid_reports(grid, k), samples, seed, workers);

  VerificationReport report;
  report.check = "payment_identity";
  report.samples = samples;
  report.seed = seed;
  report.config_digest = detail::params_digest(report.check, consumer, grid, samples, seed);
  detail::ComparisonLog log(report);
  for (Level c = 1; c <= k; ++c) {
    std::vector<std::size_t> idx;
    for (Valuation v : grid) idx.push_back(table.index_of(v, c));
    const double q0 = table.estimate(idx[0]).q_bar;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      Moments x;
      for (std::size_t s = 0; s < samples; ++s) {
        double integral = 0.0;
        for (std::size_t m = 0; m < j; ++m) {
          integral += 0.5 * (grid[m + 1] - grid[m]) *
                      ((table.served(s, idx[m], c) ? 1.0 : 0.0) + (table.served(s, idx[m + 1], c) ? 1.0 : 0.0));
        }
        const double q = table.served(s, idx[j], c) ? 1.0 : 0.0;
        x.add(table.payment(s, idx[j]) - (grid[j] * q - integral));
      }
      const double qj = table.estimate(idx[j]).q_bar;
      const double slack = 0.5 * h * std::max(0.0, qj - q0);
      log.two_sided(x, "consumer " + std::to_string(consumer) + " level " + std::to_string(c) + " r " +
                           detail::describe(grid[j]),
                    slack);
    }
  }
  return report;
}

// Every truthful realization: theta_l [served] - payment_l >= 0 exactly, and
// consumers without a good pay exactly 0.
inline VerificationReport check_ir_expost(const Economy& economy, const Mechanism& mechanism, std::size_t trials,
                                          std::uint64_t seed, int workers = 1) {
  if (trials < 1) throw DomainError("ex post IR check needs at least one trial");
  struct Chunk {
    std::uint64_t violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::string where;
  };
  const std::size_t chunk = 1024;
  std::vector<Chunk> parts((trials + chunk - 1) / chunk);
  for_each_chunk(trials, chunk, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Chunk& part = parts[c];
    for (std::size_t t = begin; t < end; ++t) {
      const TypeProfile p = detail::draw_profile(economy, seed, t);
      const AuctionOutcome o = mechanism(p);
      for (std::size_t l = 0; l < p.size(); ++l) {
        const bool served = o.allocation.served_within(static_cast<int>(l), p.levels[l], economy.structure);
        const double margin = p.valuations[l] * (served ? 1.0 : 0.0) - o.payments[l];
        const bool bad = margin < 0.0 || (!o.allocation.good_of(static_cast<int>(l)) && o.payments[l] != 0.0);
        if (bad) ++part.violations;
        if (margin < part.worst) {
          part.worst = margin;
          part.where = "trial " + std::to_string(t) + " consumer " + std::to_string(l);
        }
      }
    }
  });
  VerificationReport report;
  report.check = "ir_expost";
  report.samples = trials;
  report.seed = seed;
  report.config_digest = detail::params_digest(report.check, -1, {}, trials, seed);
  report.worst_margin = std::numeric_limits<double>::infinity();
  std::uint64_t violations = 0;
  for (const Chunk& part : parts) {
    violations += part.violations;
    if (part.worst < report.worst_margin) {
      report.worst_margin = part.worst;
      report.worst_case = part.where;
    }
  }
  if (!std::isfinite(report.worst_margin)) report.worst_margin = 0.0;
  report.comparisons = trials * economy.models.size();
  report.passed = violations == 0;
  if (violations > 0) report.worst_case += " (" + std::to_string(violations) + " violations)";
  return report;
}

struct RevenueEstimate {
  double revenue = 0.0;
  double revenue_stderr = 0.0;
  double virtual_surplus = 0.0;  // E[sum of served consumers' virtual valuations]
  double virtual_surplus_stderr = 0.0;
  double difference = 0.0;  // paired revenue - virtual surplus
  double difference_stderr = 0.0;
  std::uint64_t trials = 0;
};

constexpr std::size_t kMinRevenueTrials = 1000;

inline RevenueEstimate estimate_revenue(const Economy& economy, const Mechanism& mechanism, std::size_t trials,
                                        std::uint64_t seed, int workers = 1) {
  if (trials < kMinRevenueTrials) throw DomainError("revenue estimates need at least 1000 trials");
  struct Chunk {
    Moments rev, vs, diff;
  };
  const std::size_t chunk = 1024;
  std::vector<Chunk> parts((trials + chunk - 1) / chunk);
  for_each_chunk(trials, chunk, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Chunk& part = parts[c];
    for (std::size_t t = begin; t < end; ++t) {
      const TypeProfile p = detail::draw_profile(economy, seed, t);
      const AuctionOutcome o = mechanism(p);
      double revenue = 0.0;
      double surplus = 0.0;
      for (std::size_t l = 0; l < p.size(); ++l) {
        revenue += o.payments[l];
        if (o.allocation.served_within(static_cast<int>(l), p.levels[l], economy.structure)) {
          surplus += virtual_valuation(economy.models[l], p.levels[l], p.valuations[l]);
        }
      }
      part.rev.add(revenue);
      part.vs.add(surplus);
      part.diff.add(revenue - surplus);
    }
  });
  Chunk total;
  for (const Chunk& part : parts) {
    total.rev.merge(part.rev);
    total.vs.merge(part.vs);
    total.diff.merge(part.diff);
  }
  return {total.rev.mean(),  total.rev.std_error(),  total.vs.mean(), total.vs.std_error(),
          total.diff.mean(), total.diff.std_error(), trials};
}

// Revenue equals virtual surplus in expectation (within 3 paired stderr).
inline VerificationReport check_revenue_identity(const Economy& economy, const Mechanism& mechanism,
                                                 std::size_t trials, std::uint64_t seed, int workers = 1) {
  const RevenueEstimate est = estimate_revenue(economy, mechanism, trials, seed, workers);
  VerificationReport report;
  report.check = "revenue_identity";
  report.samples = trials;
  report.seed = seed;
  report.config_digest = detail::params_digest(report.check, -1, {}, trials, seed);
  report.comparisons = 1;
  const double margin = -std::abs(est.difference);
  report.worst_margin = margin;
  if (est.difference_stderr > 0.0) {
    report.worst_z = margin / est.difference_stderr;
    report.passed = report.worst_z >= -kZThreshold;
  } else {
    report.passed = margin >= -kExactTolerance;
  }
  report.worst_case = "revenue " + detail::describe(est.revenue) + " vs virtual surplus " +
                      detail::describe(est.virtual_surplus);
  return report;
}

namespace detail {

// Deterministic comparisons "margin >= 0"; the report keeps the smallest.
class ExactLog {
 public:
  explicit ExactLog(VerificationReport& r) : r_(r) {}

  void record(double margin, const std::string& where) {
    ++r_.comparisons;
    if (r_.comparisons == 1 || margin < r_.worst_margin) {
      r_.worst_margin = margin;
      r_.worst_case = where;
    }
    if (margin < 0.0) r_.passed = false;
  }

 private:
  VerificationReport& r_;
};

}  // namespace detail

constexpr double kOracleObjectiveTolerance = 1e-12;
constexpr double kPaymentTolerance = 1e-8;

// On `instances` profiles drawn from the economy, the winners' virtual
// valuations sum to the brute-force optimum over adequate winner sets.
inline VerificationReport check_oracle_equivalence(const Economy& economy, std::size_t instances,
                                                   std::uint64_t seed) {
  VerificationReport report;
  report.check = "oracle_allocation";
  report.samples = instances;
  report.seed = seed;
  report.config_digest = detail::params_digest(report.check, -1, {}, instances, seed);
  detail::ExactLog log(report);
  for (std::size_t s = 0; s < instances; ++s) {
    const TypeProfile p = detail::draw_profile(economy, seed, s);
    const Allocation a = allocate(economy.models, economy.structure, p);
    const OracleResult best = brute_force_allocation(a.trace.virtual_valuations, p.levels, economy.structure);
    double sum = 0.0;
    for (int l : a.winners) sum += a.trace.virtual_valuations[static_cast<std::size_t>(l)];
    log.record(kOracleObjectiveTolerance - std::abs(sum - best.objective), "instance " + std::to_string(s));
  }
  return report;
}

// Every winner pays its critical bid and the integral form of the payment
// (both within 1e-8); every loser pays exactly 0.
inline VerificationReport check_payment_rule(const Economy& economy, std::size_t instances, std::uint64_t seed) {
  VerificationReport report;
  report.check = "payment_rule";
  report.samples = instances;
  report.seed = seed;
  report.config_digest = detail::params_digest(report.check, -1, {}, instances, seed);
  detail::ExactLog log(report);
  for (std::size_t s = 0; s < instances; ++s) {
    const TypeProfile p = detail::draw_profile(economy, seed, s);
    const AuctionOutcome o = run_auction(economy.models, economy.structure, p);
    for (std::size_t l = 0; l < p.size(); ++l) {
      const int id = static_cast<int>(l);
      const std::string where = "instance " + std::to_string(s) + " consumer " + std::to_string(l);
      if (!o.wins(id)) {
        log.record(o.payments[l] == 0.0 ? 0.0 : -std::abs(o.payments[l]), where + " (loser)");
        continue;
      }
      const ThresholdValue cb = critical_bid(economy.models, economy.structure, p, id);
      const IntegralPayment ip = payment_by_integral(economy.models, economy.structure, p, id);
      log.record(kPaymentTolerance - std::abs(o.payments[l] - cb.theta), where + " (critical bid)");
      log.record(kPaymentTolerance - std::abs(o.payments[l] - ip.payment), where + " (integral)");
    }
  }
  return report;
}

}  // namespace flexauction
