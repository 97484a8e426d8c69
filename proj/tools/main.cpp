// coinflip: experiment harness for coalition influence computations.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coinflip/errors.hpp"
#include "coinflip/parallel.hpp"
#include "commands.hpp"

namespace {

using coinflip::cli::Config;

constexpr int kExitFailed = 2;
constexpr int kExitConfig = 3;
constexpr int kExitBudget = 4;

struct Command {
  const char* name;
  const char* help;
};

const Command kCommands[] = {
    {"influence", "Coalition influence I_S^b"},
    {"boosted-influence", "Boosted influence I_S^{b,t}"},
    {"resilience", "Exhaustive resilience check against coalitions of size <= ell"},
    {"search-single", "Single-round coalition search"},
    {"search-range", "Bit-by-bit search for ranged functions"},
    {"search-multi", "Multi-round coalition search"},
    {"adversary-dp", "Exact rushing-adversary game value"},
    {"verify-prop22", "Fraction of boosted supports with influence >= 1 - epsilon"},
    {"verify-or-example", "Exact OR influences against their closed forms"},
    {"zoo", "verify-prop22 over the benchmark functions"},
};

void add_options(CLI::App* sub, Config& c) {
  sub->add_option("--config", "JSON file of option values; command-line flags take precedence");
  sub->add_option("--experiment", c.experiment, "Experiment id written to every row");
  sub->add_option("--function", c.function, "Function spec");
  sub->add_option("--measure", c.measures, "Measure spec (repeat once per round for multi-round commands)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sub->add_option("--n", c.n, "Arity when no measure is given")->capture_default_str();
  sub->add_option("--mode", c.mode, "exact or mc")->capture_default_str();
  sub->add_option("--mc-samples", c.mc_samples, "Monte-Carlo sample count")->capture_default_str();
  sub->add_option("--epsilon", c.epsilon, "Target error");
  sub->add_option("--seed", c.seed, "Random seed (required by randomized commands)");
  sub->add_option("--t", c.t, "Boost level")->capture_default_str();
  sub->add_option("--S,--coalition", c.coalition, "Coalition as 1-based indices joined by ';'");
  sub->add_option("--b", c.b, "Target value")->capture_default_str();
  sub->add_option("--ell", c.ell, "Largest coalition size for resilience")->capture_default_str();
  sub->add_option("--rounds", c.rounds, "Round count")->capture_default_str();
  sub->add_option("--k", c.k, "Support boost level (default ceil(10 ln(1/eps)/eps))");
  sub->add_option("--supports", c.supports, "Supports sampled by the survey")->capture_default_str();
  sub->add_option("--trials", c.trials, "Supports tried by the boosted search")->capture_default_str();
  sub->add_option("--restrictions", c.restrictions, "Restrictions sampled for the election")->capture_default_str();
  sub->add_option("--subset-trials", c.subset_trials, "Random subsets tried")->capture_default_str();
  sub->add_option("--candidates", c.candidates, "Elected candidates tried")->capture_default_str();
  sub->add_option("--base-trials", c.base_trials, "Supports per one-bit search")->capture_default_str();
  sub->add_option("--retries", c.retries, "Restarts (0: procedure default)")->capture_default_str();
  sub->add_option("--pool-size", c.pool_size, "Coalitions drawn per round pool")->capture_default_str();
  sub->add_option("--rollout-samples", c.rollout_samples, "Monte-Carlo rollouts")->capture_default_str();
  sub->add_option("--range-constant", c.range_constant, "Constant in the range-search support size")
      ->capture_default_str();
  sub->add_option("--delta-constant", c.delta_constant, "Constant in the round schedule")->capture_default_str();
  sub->add_flag("--with-strategy", c.with_strategy, "Include the optimal strategy in the JSON output");
  sub->add_flag("--expect-failed", c.expect_failed, "Exit 0 when the search fails, 2 when it succeeds");
  sub->add_flag("--allow-mc-fallback", c.allow_mc_fallback, "Use Monte-Carlo when exact work is out of budget");
  sub->add_option("--threads", c.threads, "Worker threads (0: $COINFLIP_THREADS or hardware)")
      ->capture_default_str();
  sub->add_option("--out", c.out, "CSV output file (default stdout)");
  sub->add_option("--json", c.json, "JSON sidecar file");
}

bool mentions(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Turns config-file entries into flags placed before the user's own, skipping
// any option the user set explicitly.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw coinflip::DomainError("--config: cannot open \"" + path + "\"");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw coinflip::DomainError("--config: invalid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw coinflip::DomainError("--config: top level must be an object");
  std::vector<std::string> merged;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || key == "subcommand" || mentions(args, flag)) continue;
    auto text = [&](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_boolean()) {
      if (value.get<bool>()) merged.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        merged.push_back(flag);
        merged.push_back(text(v));
      }
    } else if (!value.is_null()) {
      merged.push_back(flag);
      merged.push_back(text(value));
    }
  }
  merged.insert(merged.end(), args.begin(), args.end());
  return merged;
}

// "--S=" means an explicitly empty value.
std::vector<std::string> split_empty_values(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const auto& a : args) {
    if (a.size() > 3 && a.rfind("--", 0) == 0 && a.back() == '=') {
      out.push_back(a.substr(0, a.size() - 1));
      out.emplace_back();
    } else {
      out.push_back(a);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coalition influence experiments for collective coin-flipping", "coinflip"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Config config;
  for (const auto& cmd : kCommands) add_options(app.add_subcommand(cmd.name, cmd.help), config);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (!args.empty()) {
      std::vector<std::string> rest(args.begin() + 1, args.end());
      rest = merge_config(split_empty_values(rest));
      rest.insert(rest.begin(), args[0]);
      args = rest;
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  for (const auto* sub : app.get_subcommands()) config.subcommand = sub->get_name();
  if (config.experiment.empty()) config.experiment = config.subcommand;
  coinflip::set_thread_count(config.threads);

  coinflip::cli::Result result;
  try {
    result = coinflip::cli::run_command(config);
  } catch (const coinflip::BudgetExceeded& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const coinflip::PreconditionViolated& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const coinflip::OutOfRegime& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (config.out.empty()) {
    coinflip::cli::write_csv(std::cout, config.experiment, config.subcommand, result.rows);
  } else {
    std::ofstream out(config.out);
    if (!out) {
      std::cerr << "config error: cannot write \"" << config.out << "\"\n";
      return kExitConfig;
    }
    coinflip::cli::write_csv(out, config.experiment, config.subcommand, result.rows);
  }
  if (!config.json.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.rows) rows.push_back(coinflip::cli::row_json(r));
    nlohmann::json doc = {{"schema_version", coinflip::cli::kSchemaVersion},
                          {"config", config.to_json()},
                          {"rows", rows},
                          {"results", result.details}};
    std::ofstream out(config.json);
    if (!out) {
      std::cerr << "config error: cannot write \"" << config.json << "\"\n";
      return kExitConfig;
    }
    out << doc.dump(2) << "\n";
  }
  if (config.expect_failed) return result.negative ? 0 : kExitFailed;
  return result.negative ? kExitFailed : 0;
}
