#pragma once

#include <string>
#include <vector>

#include "zapsa/config.hpp"

namespace zapsa::cli {

// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

int run_solve(const config::RunConfig& cfg);
int run_cov(const config::RunConfig& cfg);
int run_single(const config::RunConfig& cfg);
int run_bench(const config::RunConfig& cfg);

// Full command-line entry (subcommand + flags + --key=value overrides).
int main_entry(const std::vector<std::string>& args);

}  // namespace zapsa::cli
