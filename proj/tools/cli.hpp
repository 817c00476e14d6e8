#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace conespec::cli {

enum ExitCode : int { kPass = 0, kUsage = 1, kPrecondition = 2, kBudget = 3 };

// Defaults for every section; user configs are merge-patched onto this.
nlohmann::json default_config();
// Merges, applies KEY=VAL tolerance overrides and validates. Throws
// std::invalid_argument on malformed input.
nlohmann::json materialize(const nlohmann::json& user, const std::vector<std::string>& tol_overrides);
// FNV-1a over the canonical dump of the materialized config.
std::uint64_t config_hash(const nlohmann::json& config);
std::string hash_hex(std::uint64_t h);

// Runs one verb; returns the process exit code.
int run(int argc, char** argv);

}  // namespace conespec::cli
