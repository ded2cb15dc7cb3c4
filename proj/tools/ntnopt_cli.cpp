// Command line driver: run simulation campaigns, validate configs and
// summarize completed output directories.
//
// Exit codes: 0 success (coverage-infeasible runs are reported as warnings),
// 1 nothing to summarize, 2 config validation failure, 3 I/O failure.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ntnopt/campaign.hpp"
#include "ntnopt/config.hpp"

namespace {

void print_machine_error(const std::string& kind, const std::string& field,
                         const std::string& message) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  if (!field.empty()) j["field"] = field;
  std::cerr << j.dump() << "\n";
}

std::vector<std::uint64_t> parse_seeds_flag(const std::string& text) {
  // A single integer N means seeds 1..N; a comma list is taken verbatim.
  if (text.find(',') == std::string::npos) {
    std::size_t pos = 0;
    const long n = std::stol(text, &pos);
    if (pos != text.size() || n < 1)
      throw std::invalid_argument("--seeds expects a positive count or a comma list");
    std::vector<std::uint64_t> seeds;
    for (long s = 1; s <= n; ++s) seeds.push_back(std::uint64_t(s));
    return seeds;
  }
  std::vector<std::uint64_t> seeds;
  std::string cell;
  std::istringstream in(text);
  while (std::getline(in, cell, ',')) {
    std::size_t pos = 0;
    const long s = std::stol(cell, &pos);
    if (pos != cell.size() || s < 0)
      throw std::invalid_argument("--seeds list entries must be nonnegative integers");
    seeds.push_back(std::uint64_t(s));
  }
  if (seeds.empty()) throw std::invalid_argument("--seeds list is empty");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrated terrestrial/satellite downlink simulator and optimizer"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> policy_overrides;
  std::string seeds_flag;
  std::string out_dir;
  int threads = ntnopt::default_thread_count();
  bool validate_only = false;

  CLI::App* run = app.add_subcommand("run", "Run a campaign from a config file");
  run->add_option("--config", config_path, "Campaign config file")->required();
  run->add_option("--policy", policy_overrides,
                  "Override the config's policy list (repeatable)");
  run->add_option("--seeds", seeds_flag, "Seed count N (runs 1..N) or comma list");
  run->add_option("--out", out_dir, "Output directory (default from config or $NTNOPT_OUT)");
  run->add_option("--threads", threads, "Worker threads for seeds/channel rows");
  run->add_flag("--validate-only", validate_only, "Validate the config and exit");

  CLI::App* validate = app.add_subcommand("validate", "Validate a config file");
  validate->add_option("--config", config_path, "Campaign config file")->required();

  std::string summarize_dir;
  CLI::App* summarize_cmd =
      app.add_subcommand("summarize", "Summarize a completed campaign directory");
  summarize_cmd->add_option("dir", summarize_dir, "Campaign output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (summarize_cmd->parsed()) {
    try {
      return ntnopt::summarize(summarize_dir, std::cout, std::cerr);
    } catch (const std::exception& e) {
      print_machine_error("io", "", e.what());
      return 3;
    }
  }

  ntnopt::CampaignConfig cfg;
  try {
    cfg = ntnopt::load_campaign_config(config_path);
  } catch (const ntnopt::ConfigError& e) {
    print_machine_error("config", e.field, e.what());
    return 2;
  } catch (const std::exception& e) {
    print_machine_error("io", "", e.what());
    return 3;
  }

  if (validate->parsed()) {
    std::cout << "config ok: " << config_path << "\n";
    return 0;
  }

  try {
    if (!policy_overrides.empty()) {
      cfg.policies.clear();
      for (const auto& p : policy_overrides) cfg.policies.push_back(ntnopt::Policy::parse(p));
    }
    if (!seeds_flag.empty()) cfg.seeds = parse_seeds_flag(seeds_flag);
    cfg.validate();
  } catch (const ntnopt::ConfigError& e) {
    print_machine_error("config", e.field, e.what());
    return 2;
  } catch (const std::exception& e) {
    print_machine_error("config", "flags", e.what());
    return 2;
  }

  if (!out_dir.empty()) {
    cfg.output_dir = out_dir;
  } else if (const char* env = std::getenv("NTNOPT_OUT"); env && *env) {
    cfg.output_dir = env;
  }

  if (validate_only) {
    std::cout << "config ok: " << config_path << "\n";
    return 0;
  }

  try {
    const ntnopt::CampaignOutcome outcome = ntnopt::run_campaign(cfg, threads);
    std::cout << "campaign complete: " << cfg.policies.size() << " policies x "
              << cfg.seeds.size() << " seeds -> " << cfg.output_dir << "\n";
    ntnopt::print_summary_table(std::cout, outcome.pooled);
    for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
      for (const auto& r : outcome.reports[pi]) {
        if (r.coverage_infeasible)
          std::cout << "warning: coverage infeasible links in policy " << r.policy
                    << " seed " << r.seed << " (see report.json)\n";
        if (!r.converged)
          std::cout << "warning: solver hit the iteration cap in policy " << r.policy
                    << " seed " << r.seed << "\n";
      }
    }
    return 0;
  } catch (const ntnopt::IoError& e) {
    print_machine_error("io", "", e.what());
    return 3;
  } catch (const std::exception& e) {
    print_machine_error("internal", "", e.what());
    return 3;
  }
}
