#pragma once

// Command-line front end: extract, fit, evaluate, report, all, simulate.
//
// Exit codes: 0 success, 1 data or runtime error, 2 configuration or usage
// error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace ebike::cli {

enum class Backend { Rules, Llm };

struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path out = "out";
    std::filesystem::path structured;  // defaults to <out>/structured.jsonl
    Backend backend = Backend::Rules;
    std::string model_name = "gpt-4";
    std::filesystem::path cache;  // defaults to <out>/llm_cache.jsonl
    std::filesystem::path rules;  // empty: bundled rules
    std::filesystem::path prompts;
    std::string endpoint;
    unsigned jobs = 1;
    int rpm = 60;
    std::uint64_t seed = 1;
    int simulate_n = 3000;
    bool drop_unspecified_gender = false;
    bool dummy_coding = false;
    std::filesystem::path truth;
    double alpha = 0.05;

    std::filesystem::path structured_path() const;
    std::filesystem::path cache_path() const;
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Synthetic corpus whose narratives encode known predictor codes and whose
// severities are drawn from a known ordered logit (numeric full model,
// four levels). Writes <out>/simulated_reports.csv and
// <out>/simulation_truth.json.
void simulate(const RunConfig& config);

}  // namespace ebike::cli
