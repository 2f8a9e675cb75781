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

// Command-line front end: validate models, run one auction, and run the
// verification batteries against a JSON experiment config.
//
// Exit status: 0 all checks pass, 1 a check failed, 2 bad input.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flexauction/baselines.hpp"
#include "flexauction/flexauction.hpp"
#include "flexauction/io.hpp"

namespace fa = flexauction;
namespace io = flexauction::io;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> trials;
  std::string out;
  std::optional<std::string> tie_break;
  std::optional<int> workers;
  std::optional<std::string> negative_control;
};

io::ExperimentConfig load(const Options& opt) {
  io::ExperimentConfig cfg = io::load_config(opt.config);
  if (opt.seed) cfg.seed = opt.seed;
  if (opt.samples) cfg.samples = *opt.samples;
  if (opt.trials) cfg.trials = *opt.trials;
  if (opt.tie_break) cfg.tie_break = io::tie_break_from_string(*opt.tie_break, "--tie-break");
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.negative_control) {
    cfg.negative_control = io::negative_control_from_string(*opt.negative_control, "--negative-control");
  }
  if (!opt.out.empty()) cfg.output = opt.out;
  if (cfg.workers < 1) throw InputError("workers must be at least 1");
  return cfg;
}

std::uint64_t require_seed(const io::ExperimentConfig& cfg, const char* command) {
  if (!cfg.seed) throw InputError(std::string(command) + " needs a seed (--seed or \"seed\" in the config)");
  return *cfg.seed;
}

// Writes `text` to the output path if one is configured, else to stdout.
void emit(const io::ExperimentConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw InputError("cannot write " + cfg.output);
  out << text;
}

std::string summary_line(const fa::VerificationReport& r, const std::string& scope) {
  std::ostringstream os;
  os << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(18) << r.check << ' ' << std::setw(12) << scope
     << " comparisons=" << r.comparisons << " worst_margin=" << std::setprecision(6) << r.worst_margin;
  if (!std::isnan(r.worst_z)) os << " worst_z=" << std::setprecision(4) << r.worst_z;
  if (!r.passed) os << " at " << r.worst_case;
  return os.str();
}

class ReportSink {
 public:
  explicit ReportSink(bool echo_summary) : echo_(echo_summary) {}

  void add(const fa::VerificationReport& r, const std::string& scope) {
    jsonl_ << io::report_to_json(r, scope).dump() << '\n';
    if (echo_) std::cout << summary_line(r, scope) << std::endl;
    if (!r.passed) failed_ = true;
  }

  std::string text() const { return jsonl_.str(); }
  bool failed() const { return failed_; }

 private:
  bool echo_;
  bool failed_ = false;
  std::ostringstream jsonl_;
};

fa::Mechanism mechanism_for(const io::ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.negative_control) {
    case io::NegativeControl::reserve_always:
      return fa::reserve_always_mechanism(cfg.economy);
    case io::NegativeControl::naive_second_price:
      return fa::naive_second_price_mechanism(cfg.economy.structure);
    case io::NegativeControl::none:
      break;
  }
  return fa::optimal_mechanism(cfg.economy, cfg.tie_break, seed);
}

void exact_checks(const io::ExperimentConfig& cfg, std::uint64_t seed, ReportSink& sink) {
  try {
    sink.add(fa::check_oracle_equivalence(cfg.economy, static_cast<std::size_t>(cfg.oracle_instances), seed),
             "economy");
  } catch (const fa::CapacityError& e) {
    throw InputError(std::string(e.what()) + "; use a config with at most " +
                     std::to_string(fa::kOracleMaxConsumers) + " consumers for oracle checks");
  }
  sink.add(fa::check_payment_rule(cfg.economy, static_cast<std::size_t>(cfg.oracle_instances), seed), "economy");
}

int cmd_validate(const Options& opt) {
  const io::ExperimentConfig cfg = load(opt);
  bool failed = false;
  std::ostringstream jsonl;
  for (const auto& m : cfg.economy.models) {
    const fa::HazardReport h = fa::validate_hazard(m, cfg.hazard_grid);
    const std::vector<bool> neg = fa::validate_negative_reserve(m);
    const std::string who = "consumer " + std::to_string(m.consumer_id());
    std::cout << (h.weak_ok ? "PASS " : "FAIL ") << who << " hazard (weak)";
    if (!h.weak_ok) {
      std::cout << ": h(" << h.worst_violation.dominated_theta << "|" << h.worst_violation.dominated_level
                << ") exceeds h(" << h.worst_violation.theta << "|" << h.worst_violation.level << ") by "
                << h.worst_violation.magnitude;
    }
    std::cout << '\n';
    if (h.weak_ok && !h.strict_ok) std::cout << "WARN " << who << " hazard (strict) does not hold\n";
    io::Json j;
    j["consumer_id"] = m.consumer_id();
    j["hazard_grid"] = h.grid_resolution;
    j["weak_ok"] = h.weak_ok;
    j["strict_ok"] = h.strict_ok;
    j["worst_weak_violation"] = h.worst_violation.magnitude;
    j["negative_reserve"] = io::Json::array();
    for (std::size_t l = 0; l < neg.size(); ++l) {
      const fa::Level level = static_cast<fa::Level>(l + 1);
      const double w = fa::virtual_valuation(m, level, m.support_min());
      j["negative_reserve"].push_back({{"level", level}, {"ok", static_cast<bool>(neg[l])}, {"w_at_min", w}});
      if (!neg[l]) {
        std::cout << "FAIL " << who << " level " << level << ": w(theta_min) = " << w << " is not negative\n";
        failed = true;
      }
    }
    if (!h.weak_ok) failed = true;
    jsonl << j.dump() << '\n';
  }
  if (!cfg.output.empty()) emit(cfg, jsonl.str());
  return failed ? kExitCheckFailed : kExitPass;
}

int cmd_run(const Options& opt) {
  const io::ExperimentConfig cfg = load(opt);
  if (opt.profile.empty()) throw InputError("run needs --profile");
  const fa::TypeProfile p = io::profile_from_json(io::load_file(opt.profile), opt.profile);
  fa::AuctionOutcome o;
  if (cfg.tie_break == fa::TieBreak::random) {
    fa::Rng rng = fa::stream_rng(require_seed(cfg, "run with --tie-break random"), 0);
    o = fa::run_auction(cfg.economy.models, cfg.economy.structure, p, fa::TieBreak::random, &rng);
  } else {
    o = fa::run_auction(cfg.economy.models, cfg.economy.structure, p);
  }
  emit(cfg, io::outcome_to_json(p, o).dump(2) + "\n");
  return kExitPass;
}

int cmd_verify(const Options& opt) {
  const io::ExperimentConfig cfg = load(opt);
  const std::uint64_t seed = require_seed(cfg, "verify");
  const fa::Economy& e = cfg.economy;
  const fa::Mechanism mech = mechanism_for(cfg, seed);
  ReportSink sink(!cfg.output.empty());

  exact_checks(cfg, seed, sink);
  for (int l = 0; l < e.consumers(); ++l) {
    const std::string scope = "consumer " + std::to_string(l);
    const auto grid = fa::interior_grid(e.models[static_cast<std::size_t>(l)], cfg.grid_points);
    const auto [bic, mono] = fa::check_bic_and_monotonicity(e, mech, l, grid, cfg.samples, seed, cfg.workers);
    sink.add(bic, scope);
    sink.add(mono, scope);
    sink.add(fa::check_boundary_payment(e, mech, l, cfg.samples, seed, cfg.workers), scope);
    sink.add(fa::check_payment_identity(e, mech, l, cfg.identity_cells, cfg.samples, seed, cfg.workers), scope);
  }
  sink.add(fa::check_ir_expost(e, mech, cfg.trials, seed, cfg.workers), "economy");
  sink.add(fa::check_revenue_identity(e, mech, cfg.trials, seed, cfg.workers), "economy");
  emit(cfg, sink.text());
  return sink.failed() ? kExitCheckFailed : kExitPass;
}

int cmd_oracle_check(const Options& opt) {
  const io::ExperimentConfig cfg = load(opt);
  ReportSink sink(!cfg.output.empty());
  exact_checks(cfg, require_seed(cfg, "oracle-check"), sink);
  emit(cfg, sink.text());
  return sink.failed() ? kExitCheckFailed : kExitPass;
}

int cmd_revenue(const Options& opt) {
  const io::ExperimentConfig cfg = load(opt);
  const std::uint64_t seed = require_seed(cfg, "revenue");
  const fa::Mechanism mech = mechanism_for(cfg, seed);
  const fa::RevenueEstimate est = fa::estimate_revenue(cfg.economy, mech, cfg.trials, seed, cfg.workers);
  const fa::VerificationReport check = fa::check_revenue_identity(cfg.economy, mech, cfg.trials, seed, cfg.workers);
  io::Json j;
  j["schema_version"] = io::kSchemaVersion;
  j["trials"] = est.trials;
  j["seed"] = seed;
  j["revenue"] = est.revenue;
  j["revenue_stderr"] = est.revenue_stderr;
  j["virtual_surplus"] = est.virtual_surplus;
  j["virtual_surplus_stderr"] = est.virtual_surplus_stderr;
  j["difference"] = est.difference;
  j["difference_stderr"] = est.difference_stderr;
  j["identity"] = io::report_to_json(check, "economy");
  emit(cfg, j.dump(2) + "\n");
  return check.passed ? kExitPass : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Revenue-maximizing auction for consumers with nested flexibility sets"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "random seed; overrides the config");
    sub->add_option("--samples", opt.samples, "Monte Carlo samples per interim estimate");
    sub->add_option("--trials", opt.trials, "Monte Carlo trials for IR and revenue");
    sub->add_option("--out", opt.out, "output file; overrides the config");
    sub->add_option("--tie-break", opt.tie_break, "tie-breaking rule")
        ->check(CLI::IsMember({"index", "random"}));
    sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--negative-control", opt.negative_control, "replace the mechanism with a known-bad one")
        ->check(CLI::IsMember({"none", "reserve_always", "naive_second_price"}));
  };

  CLI::App* validate = app.add_subcommand("validate", "check the hazard-rate and negative-reserve conditions");
  CLI::App* run = app.add_subcommand("run", "run the auction on one type profile");
  CLI::App* verify = app.add_subcommand("verify", "run every verification check");
  CLI::App* oracle = app.add_subcommand("oracle-check", "compare against brute-force oracles");
  CLI::App* revenue = app.add_subcommand("revenue", "estimate expected revenue and virtual surplus");
  for (CLI::App* sub : {validate, run, verify, oracle, revenue}) common(sub);
  run->add_option("--profile", opt.profile, "type profile (JSON)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInputError;
  }

  try {
    if (*validate) return cmd_validate(opt);
    if (*run) return cmd_run(opt);
    if (*verify) return cmd_verify(opt);
    if (*oracle) return cmd_oracle_check(opt);
    if (*revenue) return cmd_revenue(opt);
  } catch (const fa::ContractError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    // Every other library error means the input was unusable.
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
