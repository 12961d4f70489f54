// Synthetic sensing worlds: user populations with power-law abilities,
// Poisson arrivals on an integer horizon, and the effort-to-coverage model
// (a road walk whose length grows with effort, sensed within the user's
// range).
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bbs/coverage.hpp"
#include "bbs/rng.hpp"

namespace bbs {

struct User {
  std::uint32_t id;
  double theta;            // ability in (0,1]
  double sensing_range_m;  // physical sensing radius
  std::uint32_t location;  // grid point id
};

struct UserPopulation {
  std::vector<User> users;
};

struct ArrivalProcess {
  double rate;  // arrivals per time step, > 0
  int horizon;  // T
};

struct Arrival {
  int t;
  User user;
};

struct ProfileModel {
  double walk_scale_m = 100.0;  // walk meters per unit of effort
  double noise_scale = 1.0;     // measurement error scale at zero effort
};

struct GridParams {
  int avenues = 3;
  int streets = 3;
  double avenue_len_m = 1135.0;
  double street_len_m = 319.0;
  double spacing_m = 1.0;
};

struct ScenarioParams {
  GridParams grid;
  int population = 200;
  double ability_exponent = 0.5;
  bool heterogeneous_ranges = true;
  double range_min_m = 3.0;
  double range_max_m = 10.0;
  double fixed_range_m = 7.0;
  double rate = 2.0;
  int horizon = 64;
  ProfileModel profile;
};

struct Scenario {
  AoiGrid grid;
  UserPopulation population;
  std::vector<Arrival> arrivals;  // sorted by t, stream order stable
  std::uint64_t seed = 0;
  ScenarioParams params;
};

// Inverse-CDF map u -> u^(1/c) for F(x) = x^c.
double ability_from_uniform(double u, double c);
std::vector<double> sample_abilities(int n, double c, SplitMix64& rng);

// Integer arrival steps in [1, horizon]: exponential gaps with mean 1/rate,
// truncated at the horizon; multiple arrivals per step allowed.
std::vector<int> generate_arrival_times(const ArrivalProcess& proc, SplitMix64& rng);

// Coverage of one submission: every grid point within sensing range of a
// road walk of round(walk_scale * effort / spacing) steps from the user's
// location. The walk turns toward the least recently visited neighbor (rng
// breaks ties), so coverage grows with effort along a fixed walk prefix.
SensingProfile realize_profile(const User& user, double effort, const AoiGrid& grid,
                               const ProfileModel& model, SplitMix64& rng);

// Nonnegative measurement error with standard deviation noise_scale/(1+e):
// |N(0,1)| rescaled so the draw's std matches exactly.
double measurement_error(double effort, double noise_scale, SplitMix64& rng);

Scenario build_scenario(const ScenarioParams& params, std::uint64_t seed);

// Structured text serialization for exact replay (grid params, population,
// arrival times, seed).
void write_scenario(const Scenario& s, std::ostream& out);
Scenario read_scenario(std::istream& in);

}  // namespace bbs
