#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mhc/solver.hpp"

namespace mhc {

// CPLEX-LP text. Variables are named b<id>; constraint names carry the
// provenance tag (e.g. "triangle_12") and survive a round trip. Constraint
// coefficients must be integers on read.
std::string write_lp(const LpProblem& p);
LpProblem read_lp(std::string_view text);

void save_lp(const LpProblem& p, const std::filesystem::path& path);
LpProblem load_lp(const std::filesystem::path& path);

}  // namespace mhc
