/**
 * @file io.hpp
 * @brief Strict JSON readers and writers for instances, utility specs,
 * corridor files, solutions and simulation reports. Unknown keys, missing
 * required keys and wrong types are InputErrors.
 */
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cdsndp/choice.hpp"
#include "cdsndp/instance.hpp"
#include "cdsndp/reformulation.hpp"
#include "cdsndp/simulator.hpp"
#include "json.hpp"

namespace cdsndp {

using Json = nlohmann::ordered_json;

/// Instance plus the optional utility entries of its file.
struct InstanceFile {
  Instance instance;
  std::optional<UtilitySpec> utility;       ///< the operator's model of the shippers
  std::optional<UtilitySpec> true_utility;  ///< used by out-of-sample simulation
};

/// `{"model": "deterministic" | "mnl" | "mixed_logit" | "cost_only", ...}`; either
/// explicit coefficients or `"preset": "estimated" | "weighted_logit_mixture"` plus `vot`.
UtilitySpec utility_from_json(const Json& j);
Json utility_to_json(const UtilitySpec& spec);

InstanceFile instance_from_json(const Json& j);
Json instance_to_json(const Instance& instance, const std::optional<UtilitySpec>& utility = std::nullopt,
                      const std::optional<UtilitySpec>& true_utility = std::nullopt);

InstanceFile load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const Instance& instance,
                   const std::optional<UtilitySpec>& utility = std::nullopt,
                   const std::optional<UtilitySpec>& true_utility = std::nullopt);

/// `{"ods": [{"origin", "destination", "volume", "seaport", "iwt"?, "rail"?, "road"?}]}`.
std::vector<CorridorOd> corridor_from_json(const Json& j);
std::vector<CorridorOd> load_corridor(const std::filesystem::path& path);
void write_choice_dataset_csv(const ChoiceDataset& data, std::ostream& out);

/// Decisions, objective information and realization-averaged flows.
Json solution_to_json(const Solution& solution, const Instance& instance);
Json simulation_to_json(const SimulationReport& report);

/// Parses a whole file as JSON; InputError with the file name on failure.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// FNV-1a of the file bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace cdsndp
