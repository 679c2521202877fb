#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdef/density_model.hpp"

namespace mdef {

// Reference models shared by the test suite and the command-line `fixtures`
// subcommand.  Letters match the config files the tool writes.

// One name, unit exponential density, truncated Lebesgue outcomes.
DensityModel fixture_a(int t_max = 4);

// Memoryless ten-cell grid version of the same law: cell k holds the mass of
// (k, k+1], so survival prices stay exactly exponential on integer dates.
DensityModel fixture_a_grid(int t_max = 3);

// Two scenarios, two outcomes, updated density concentrating on the
// diagonal.  The density ratio beta_1 takes values {0, 2}.
DensityModel fixture_b();

// Two-name models on a two-step binary tree with scenario-coupled seeded
// densities.
DensityModel fixture_c_ordered(std::uint64_t seed = 7);
DensityModel fixture_c_nonordered(std::uint64_t seed = 7);

// Same support as the non-ordered variant with a time-constant density, so
// the outcome stays independent of the scenario path.
DensityModel fixture_c_product();

// Ranked pairs carrying +-1 marks.
DensityModel fixture_c_marked(std::uint64_t seed = 7);

// Two independent unit exponentials.
DensityModel fixture_d(int t_max = 4);

// Exchangeable unit-exponential pair seen through its ranked default times.
DensityModel fixture_d_ordered(int t_max = 4);

ScenarioTree binary_two_step();

std::vector<std::string> fixture_names();
DensityModel fixture_by_name(const std::string& name, std::uint64_t seed = 7);

}  // namespace mdef
