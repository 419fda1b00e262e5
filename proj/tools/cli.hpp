/**
 * @file cli.hpp
 * @brief Command-line front end. `run` is the whole program minus process
 * setup so tests can drive it in-process.
 */
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cdsndp/choice.hpp"
#include "cdsndp/instance.hpp"

namespace cdsndp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitTimeout = 3;
inline constexpr int kExitInput = 4;

inline constexpr const char* kVersion = "0.1.0";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "lo:hi:step" -> {lo, hi, step}; InputError when malformed or step <= 0.
struct Range {
  double lo = 0.0, hi = 0.0, step = 1.0;
};
Range parse_range(const std::string& text);

/// "3" or "1,2,3" -> values. A single value is broadcast to `count` entries.
std::vector<double> parse_list(const std::string& text, std::size_t count);

/// Model name to utility spec and the instance it is solved on.
struct ModelSetup {
  Instance instance;
  UtilitySpec spec;
};
/// benchmark | sndp | cd-det | cd-mnl | cd-mixed. The choice-driven models need a VoT.
ModelSetup setup_model(const std::string& model, const Instance& instance, std::optional<double> vot);

struct Stats {
  double min = 0.0, avg = 0.0, max = 0.0;
  std::size_t count = 0;
};
/// NaN entries are ignored; count 0 when none is left.
Stats summarize(const std::vector<double>& values);

}  // namespace cdsndp::cli
