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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "flexauction/baselines.hpp"
#include "flexauction/flexauction.hpp"
#include "support/fixtures.hpp"

namespace fa = flexauction;
namespace fs = std::filesystem;
using fa::testing::RandomInstance;

namespace {

constexpr std::uint64_t kSeed = 20261019;
constexpr std::size_t kMcSamples = 100000;

struct Outcome {
  bool passed = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.passed) ++failures;
  std::ostringstream line;
  line << (o.passed ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " (" << o.detail << "; "
       << std::fixed << std::setprecision(1) << secs << " s)";
  std::cout << line.str() << std::endl;
}

struct Fixture {
  std::string name;
  fa::Economy economy;
};

std::vector<Fixture> fixtures() {
  return {{"nested_two_goods", fa::testing::nested_two_goods()},
          {"iid_uniform_two_level", fa::testing::iid_uniform_two_level()},
          {"heterogeneous_three_level", fa::testing::heterogeneous_three_level()}};
}

std::vector<RandomInstance> random_instances(std::size_t count) {
  fa::Rng rng = fa::stream_rng(kSeed, 1);
  std::vector<RandomInstance> out;
  while (out.size() < count) out.push_back(fa::testing::random_instance(rng));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

// Keeps the report with the smallest z across calls.
struct Worst {
  double z = INFINITY;
  std::string where;
  void take(const fa::VerificationReport& r, const std::string& scope) {
    if (!std::isnan(r.worst_z) && r.worst_z < z) {
      z = r.worst_z;
      where = scope + ": " + r.worst_case;
    }
  }
};

int run_shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main() {
  std::cout << "flexauction acceptance run, seed " << kSeed << "\n";
  const std::vector<RandomInstance> instances = random_instances(1000);

  criterion(1, "allocation matches brute-force optimum on 1000 random instances", [&] {
    int mismatches = 0;
    int hazard_rejects = 0;
    double worst = 0.0;
    for (const auto& inst : instances) {
      for (const auto& m : inst.economy.models) {
        if (!fa::validate_hazard(m, 1000).weak_ok) ++hazard_rejects;
      }
      const auto& e = inst.economy;
      const fa::Allocation a = fa::allocate(e.models, e.structure, inst.profile);
      const fa::OracleResult best =
          fa::brute_force_allocation(a.trace.virtual_valuations, inst.profile.levels, e.structure);
      double sum = 0.0;
      for (int l : a.winners) sum += a.trace.virtual_valuations[static_cast<std::size_t>(l)];
      const double gap = std::abs(sum - best.objective);
      worst = std::max(worst, gap);
      if (gap > 1e-12) ++mismatches;
    }
    return Outcome{mismatches == 0 && hazard_rejects == 0,
                   std::to_string(mismatches) + " mismatches, max gap " + fmt(worst) + ", " +
                       std::to_string(hazard_rejects) + " models failing weak hazard at grid 1000"};
  });

  criterion(2, "closed-form removals equal exhaustive minimum on the full k<=3, entries<=4 grid", [] {
    std::uint64_t pairs = 0;
    std::uint64_t mismatches = 0;
    for (int k = 1; k <= 3; ++k) {
      int cells = 1;
      for (int i = 0; i < k; ++i) cells *= 5;
      std::vector<int> n(static_cast<std::size_t>(k));
      std::vector<int> m(static_cast<std::size_t>(k));
      for (int a = 0; a < cells; ++a) {
        for (int i = 0, x = a; i < k; ++i, x /= 5) n[static_cast<std::size_t>(i)] = x % 5;
        for (int b = 0; b < cells; ++b) {
          for (int i = 0, x = b; i < k; ++i, x /= 5) m[static_cast<std::size_t>(i)] = x % 5;
          ++pairs;
          if (fa::minimal_removals(n, m).total != fa::brute_force_removals(n, m)) ++mismatches;
        }
      }
    }
    return Outcome{mismatches == 0, std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " mismatches"};
  });

  criterion(3, "winner payments equal critical bid and integral form; losers pay 0", [&] {
    int winners = 0;
    int bad = 0;
    double worst_cb = 0.0;
    double worst_int = 0.0;
    for (const auto& inst : instances) {
      const auto& e = inst.economy;
      const fa::AuctionOutcome o = fa::run_auction(e.models, e.structure, inst.profile);
      for (std::size_t l = 0; l < inst.profile.size(); ++l) {
        const int id = static_cast<int>(l);
        if (!o.wins(id)) {
          if (o.payments[l] != 0.0) ++bad;
          continue;
        }
        ++winners;
        const double cb = fa::critical_bid(e.models, e.structure, inst.profile, id).theta;
        const double ip = fa::payment_by_integral(e.models, e.structure, inst.profile, id).payment;
        worst_cb = std::max(worst_cb, std::abs(o.payments[l] - cb));
        worst_int = std::max(worst_int, std::abs(o.payments[l] - ip));
        if (std::abs(o.payments[l] - cb) > 1e-8 || std::abs(o.payments[l] - ip) > 1e-8) ++bad;
      }
    }
    return Outcome{bad == 0, std::to_string(winners) + " winners, max |t - critical| " + fmt(worst_cb) +
                                 ", max |t - integral| " + fmt(worst_int) + ", " + std::to_string(bad) +
                                 " violations"};
  });

  criterion(4, "ex post IR on 10^4 truthful profiles per fixture", [] {
    std::uint64_t checked = 0;
    bool ok = true;
    double worst = INFINITY;
    for (const auto& f : fixtures()) {
      const auto r = fa::check_ir_expost(f.economy, fa::optimal_mechanism(f.economy), 10000, kSeed);
      checked += r.comparisons;
      worst = std::min(worst, r.worst_margin);
      ok = ok && r.passed;
    }
    return Outcome{ok, std::to_string(checked) + " consumer outcomes, min utility " + fmt(worst)};
  });

  // Criteria 5 and 6 share one interim table per consumer.
  bool bic_ok = true;
  bool mono_ok = true;
  Worst bic_worst;
  Worst mono_worst;
  std::uint64_t bic_comparisons = 0;
  std::uint64_t mono_comparisons = 0;
  bool control_failed = false;
  double control_z = 0.0;
  const auto bic_start = std::chrono::steady_clock::now();
  std::string bic_error;
  try {
    for (const auto& f : fixtures()) {
      const fa::Mechanism mech = fa::optimal_mechanism(f.economy);
      for (int l = 0; l < f.economy.consumers(); ++l) {
        const auto grid = fa::interior_grid(f.economy.models[static_cast<std::size_t>(l)]);
        const auto [bic, mono] = fa::check_bic_and_monotonicity(f.economy, mech, l, grid, kMcSamples, kSeed);
        const std::string scope = f.name + " consumer " + std::to_string(l);
        bic_ok = bic_ok && bic.passed;
        mono_ok = mono_ok && mono.passed;
        bic_comparisons += bic.comparisons;
        mono_comparisons += mono.comparisons;
        bic_worst.take(bic, scope);
        mono_worst.take(mono, scope);
      }
    }
    const fa::Economy nested = fa::testing::nested_two_goods();
    const auto control = fa::check_bic(nested, fa::naive_second_price_mechanism(nested.structure), 0,
                                       fa::interior_grid(nested.models[0]), kMcSamples, kSeed);
    control_failed = !control.passed;
    control_z = control.worst_z;
  } catch (const std::exception& e) {
    bic_error = e.what();
  }
  const double bic_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - bic_start).count();

  criterion(5, "BIC on 3 fixtures at 10^5 samples; naive control fails", [&] {
    if (!bic_error.empty()) return Outcome{false, "exception: " + bic_error};
    return Outcome{bic_ok && control_failed,
                   std::to_string(bic_comparisons) + " comparisons, min z " + fmt(bic_worst.z) + " at " +
                       bic_worst.where + "; naive control " + (control_failed ? "fails" : "passes") +
                       " with z " + fmt(control_z) + "; tables built in " + fmt(bic_secs) + " s"};
  });

  criterion(6, "interim allocation nondecreasing in valuation and level", [&] {
    if (!bic_error.empty()) return Outcome{false, "exception: " + bic_error};
    return Outcome{mono_ok, std::to_string(mono_comparisons) + " comparisons, min z " + fmt(mono_worst.z) +
                                " at " + mono_worst.where};
  });

  criterion(7, "expected payment of the lowest type is 0 at every level", [] {
    bool ok = true;
    std::uint64_t comparisons = 0;
    double worst = 0.0;
    for (const auto& f : fixtures()) {
      for (int l = 0; l < f.economy.consumers(); ++l) {
        const auto r =
            fa::check_boundary_payment(f.economy, fa::optimal_mechanism(f.economy), l, kMcSamples, kSeed);
        ok = ok && r.passed;
        comparisons += r.comparisons;
        worst = std::min(worst, r.worst_margin);
      }
    }
    return Outcome{ok, std::to_string(comparisons) + " comparisons, worst margin " + fmt(worst)};
  });

  criterion(8, "revenue equals virtual surplus at 10^5 trials; single uniform bidder earns 0.25", [] {
    bool ok = true;
    std::string detail;
    for (const auto& f : fixtures()) {
      const auto r = fa::check_revenue_identity(f.economy, fa::optimal_mechanism(f.economy), kMcSamples, kSeed);
      ok = ok && r.passed;
      detail += f.name + " z " + fmt(r.worst_z) + ", ";
    }
    const fa::Economy single = fa::testing::single_uniform();
    const auto est = fa::estimate_revenue(single, fa::optimal_mechanism(single), kMcSamples, kSeed);
    const double z = (est.revenue - 0.25) / est.revenue_stderr;
    ok = ok && std::abs(z) <= fa::kZThreshold;
    detail += "single bidder revenue " + fmt(est.revenue) + " (z " + fmt(z) + ")";
    return Outcome{ok, detail};
  });

  criterion(9, "identical level-independent bidders: thresholds and payments ordered by level", [] {
    std::vector<fa::ConsumerTypeModel> models;
    for (int i = 0; i < 5; ++i) models.push_back(fa::ConsumerTypeModel::uniform(i, 0.0, 1.0, {0.3, 0.3, 0.4}));
    const fa::Economy e{models, fa::FlexibilityStructure({1, 2, 1})};
    int threshold_bad = 0;
    int payment_bad = 0;
    for (std::size_t t = 0; t < 10000; ++t) {
      const fa::TypeProfile p = fa::detail::draw_profile(e, kSeed, t);
      const fa::AuctionOutcome o = fa::run_auction(e.models, e.structure, p);
      double prev = INFINITY;
      for (fa::Level i = 1; i <= 3; ++i) {
        const double th = fa::valuation_threshold(models[0], o.w_thr, i).theta;
        if (th > prev) {
          ++threshold_bad;
          break;
        }
        prev = th;
      }
      bool ordered = true;
      for (int a : o.winners) {
        for (int b : o.winners) {
          const auto ia = static_cast<std::size_t>(a);
          const auto ib = static_cast<std::size_t>(b);
          if (p.levels[ia] < p.levels[ib] && o.payments[ia] < o.payments[ib]) ordered = false;
        }
      }
      if (!ordered) ++payment_bad;
    }
    return Outcome{threshold_bad == 0 && payment_bad == 0,
                   "10000 trials, " + std::to_string(threshold_bad) + " threshold and " +
                       std::to_string(payment_bad) + " payment order violations"};
  });

  criterion(10, "verify with a fixed seed writes byte-identical reports", [] {
    const fs::path dir = fs::temp_directory_path();
    const fs::path a = dir / "flexauction_acceptance_a.jsonl";
    const fs::path b = dir / "flexauction_acceptance_b.jsonl";
    const std::string base = std::string(FLEXAUCTION_CLI) + " verify --config " + FLEXAUCTION_CONFIGS +
                             "/default.json --seed 99 > /dev/null --out ";
    const int ca = run_shell(base + a.string());
    const int cb = run_shell(base + b.string());
    const std::string ta = slurp(a);
    const std::string tb = slurp(b);
    const bool same = !ta.empty() && ta == tb;
    return Outcome{same && ca == cb, "exit codes " + std::to_string(ca) + "/" + std::to_string(cb) + ", " +
                                         std::to_string(ta.size()) + " bytes, " +
                                         (same ? "identical" : "different") + ", digest " + fa::fnv1a_digest(ta)};
  });

  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
