#pragma once

#include <string>
#include <vector>

#include "cmcflow/hypersurface.hpp"

namespace cmcflow::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kModelError = 2,
  kBarrierViolation = 3,
  kSpacelikenessLost = 4,
  kMaxSteps = 5,
  kVerificationFailed = 6,
};

/// `start:stop:count` (inclusive, evenly spaced) or a comma separated list.
std::vector<double> parse_samples(const std::string& spec);

/// `const:T`, `sine:T,A,k` (u = T + A sin(k pi x^1 / b_1)) or `file:PATH`.
/// For files the grid comes from the file header.
GraphSurface parse_initial_surface(const std::string& spec, const PeriodicGrid& grid);

/// Runs one command line; never throws.
int dispatch(int argc, const char* const* argv);

}  // namespace cmcflow::cli
