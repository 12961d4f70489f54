#include "bbs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bbs/bidding.hpp"
#include "bbs/config.hpp"

namespace bbs {

namespace {

constexpr std::uint64_t kAbilityStream = 0x41;
constexpr std::uint64_t kLocationStream = 0x4c;
constexpr std::uint64_t kArrivalStream = 0x54;

// std of the magnitude of a unit 2-D Gaussian (Rayleigh with sigma = 1).
const double kRayleighStd = std::sqrt(2.0 - 3.14159265358979323846 / 2.0);

}  // namespace

double ability_from_uniform(double u, double c) {
  return ability_quantile(AbilityDistribution(c), u);
}

std::vector<double> sample_abilities(int n, double c, SplitMix64& rng) {
  if (n < 1) throw std::invalid_argument("abilities: need at least one user");
  AbilityDistribution dist(c);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& theta : out) theta = ability_quantile(dist, rng.next_double_open());
  return out;
}

std::vector<int> generate_arrival_times(const ArrivalProcess& proc, SplitMix64& rng) {
  if (!(proc.rate > 0.0)) throw std::invalid_argument("arrivals: rate must be positive");
  std::vector<int> times;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(proc.rate);
    if (t > static_cast<double>(proc.horizon)) break;
    times.push_back(static_cast<int>(std::ceil(t)));
  }
  return times;
}

SensingProfile realize_profile(const User& user, double effort, const AoiGrid& grid,
                               const ProfileModel& model, SplitMix64& rng) {
  if (!(effort >= 0.0)) throw std::invalid_argument("profile: negative effort");
  if (user.location >= grid.point_count()) {
    throw std::invalid_argument("profile: location outside the grid");
  }

  // Precompute lattice offsets inside the sensing disc.
  double r = user.sensing_range_m;
  auto reach = static_cast<std::int64_t>(std::floor(r / grid.spacing()));
  std::vector<std::pair<std::int64_t, std::int64_t>> disc;
  for (std::int64_t dx = -reach; dx <= reach; ++dx) {
    for (std::int64_t dy = -reach; dy <= reach; ++dy) {
      double d2 = static_cast<double>(dx * dx + dy * dy) * grid.spacing() * grid.spacing();
      if (d2 <= r * r) disc.emplace_back(dx, dy);
    }
  }

  std::vector<char> covered(grid.point_count(), 0);
  std::vector<char> probed(grid.point_count(), 0);
  auto cover_around = [&](std::uint32_t at) {
    if (probed[at]) return;
    probed[at] = 1;
    auto [ix, iy] = grid.lattice_of(at);
    for (auto [dx, dy] : disc) {
      if (auto p = grid.point_at_lattice(ix + dx, iy + dy)) covered[*p] = 1;
    }
  };

  auto steps = static_cast<std::int64_t>(
      std::llround(model.walk_scale_m * effort / grid.spacing()));
  steps = std::min<std::int64_t>(steps, 2 * static_cast<std::int64_t>(grid.point_count()));

  std::vector<std::int64_t> last_visit(grid.point_count(), -1);
  std::uint32_t cur = user.location;
  last_visit[cur] = 0;
  cover_around(cur);
  for (std::int64_t s = 1; s <= steps; ++s) {
    const auto& nb = grid.neighbors(cur);
    if (nb.empty()) break;
    std::int64_t oldest = last_visit[nb[0]];
    for (std::uint32_t cand : nb) oldest = std::min(oldest, last_visit[cand]);
    std::vector<std::uint32_t> pool;
    for (std::uint32_t cand : nb) {
      if (last_visit[cand] == oldest) pool.push_back(cand);
    }
    cur = pool[rng.uniform_below(pool.size())];
    last_visit[cur] = s;
    cover_around(cur);
  }

  SensingProfile profile;
  for (std::uint32_t p = 0; p < grid.point_count(); ++p) {
    if (covered[p]) profile.covered.push_back(p);
  }
  return profile;
}

double measurement_error(double effort, double noise_scale, SplitMix64& rng) {
  if (!(noise_scale > 0.0)) throw std::invalid_argument("error: scale must be positive");
  if (!(effort >= 0.0)) throw std::invalid_argument("error: negative effort");
  // Positional error magnitude of a 2-D Gaussian fix, rescaled so the draw's
  // standard deviation is exactly noise_scale / (1 + effort).
  double sigma = noise_scale / (1.0 + effort);
  double dx = rng.normal(0.0, 1.0);
  double dy = rng.normal(0.0, 1.0);
  return std::sqrt(dx * dx + dy * dy) * sigma / kRayleighStd;
}

Scenario build_scenario(const ScenarioParams& params, std::uint64_t seed) {
  if (params.population < 1) throw std::invalid_argument("scenario: empty population");
  if (params.horizon < 0) throw std::invalid_argument("scenario: negative horizon");

  Scenario s;
  s.params = params;
  s.seed = seed;
  s.grid = AoiGrid::manhattan(params.grid.avenues, params.grid.streets,
                              params.grid.avenue_len_m, params.grid.street_len_m,
                              params.grid.spacing_m);

  SplitMix64 root(seed);
  SplitMix64 ability_rng = root.split(kAbilityStream);
  SplitMix64 location_rng = root.split(kLocationStream);
  std::vector<double> thetas =
      sample_abilities(params.population, params.ability_exponent, ability_rng);

  s.population.users.reserve(static_cast<std::size_t>(params.population));
  for (int u = 0; u < params.population; ++u) {
    double theta = thetas[static_cast<std::size_t>(u)];
    double range = params.heterogeneous_ranges
                       ? params.range_min_m + theta * (params.range_max_m - params.range_min_m)
                       : params.fixed_range_m;
    auto loc = static_cast<std::uint32_t>(location_rng.uniform_below(s.grid.point_count()));
    s.population.users.push_back({static_cast<std::uint32_t>(u), theta, range, loc});
  }

  if (params.horizon > 0) {
    SplitMix64 arrival_rng = root.split(kArrivalStream);
    std::vector<int> times =
        generate_arrival_times({params.rate, params.horizon}, arrival_rng);
    std::size_t count = std::min(times.size(), s.population.users.size());
    s.arrivals.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      s.arrivals.push_back({times[k], s.population.users[k]});
    }
  }
  return s;
}

void write_scenario(const Scenario& s, std::ostream& out) {
  char buf[160];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "seed = " << s.seed << "\n";
  out << "grid.avenues = " << s.params.grid.avenues << "\n";
  out << "grid.streets = " << s.params.grid.streets << "\n";
  out << "grid.avenue_len_m = " << num(s.params.grid.avenue_len_m) << "\n";
  out << "grid.street_len_m = " << num(s.params.grid.street_len_m) << "\n";
  out << "grid.spacing_m = " << num(s.params.grid.spacing_m) << "\n";
  out << "population.count = " << s.population.users.size() << "\n";
  out << "population.ability_exponent = " << num(s.params.ability_exponent) << "\n";
  out << "arrivals.rate = " << num(s.params.rate) << "\n";
  out << "arrivals.horizon = " << s.params.horizon << "\n";
  out << "profile.walk_scale_m = " << num(s.params.profile.walk_scale_m) << "\n";
  out << "profile.noise_scale = " << num(s.params.profile.noise_scale) << "\n";
  for (const User& u : s.population.users) {
    out << "user." << u.id << " = " << num(u.theta) << "," << num(u.sensing_range_m)
        << "," << u.location << "\n";
  }
  out << "arrival.count = " << s.arrivals.size() << "\n";
  for (std::size_t k = 0; k < s.arrivals.size(); ++k) {
    out << "arrival." << k << " = " << s.arrivals[k].t << ","
        << s.arrivals[k].user.id << "\n";
  }
}

Scenario read_scenario(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  Config cfg = Config::parse(buf.str());

  ScenarioParams params;
  params.grid.avenues = cfg.get_int("grid.avenues", params.grid.avenues);
  params.grid.streets = cfg.get_int("grid.streets", params.grid.streets);
  params.grid.avenue_len_m = cfg.get_double("grid.avenue_len_m", params.grid.avenue_len_m);
  params.grid.street_len_m = cfg.get_double("grid.street_len_m", params.grid.street_len_m);
  params.grid.spacing_m = cfg.get_double("grid.spacing_m", params.grid.spacing_m);
  params.population = cfg.get_int("population.count", params.population);
  params.ability_exponent =
      cfg.get_double("population.ability_exponent", params.ability_exponent);
  params.rate = cfg.get_double("arrivals.rate", params.rate);
  params.horizon = cfg.get_int("arrivals.horizon", params.horizon);
  params.profile.walk_scale_m =
      cfg.get_double("profile.walk_scale_m", params.profile.walk_scale_m);
  params.profile.noise_scale =
      cfg.get_double("profile.noise_scale", params.profile.noise_scale);

  Scenario s;
  s.params = params;
  s.seed = cfg.get_u64("seed", 0);
  s.grid = AoiGrid::manhattan(params.grid.avenues, params.grid.streets,
                              params.grid.avenue_len_m, params.grid.street_len_m,
                              params.grid.spacing_m);

  int n = params.population;
  s.population.users.reserve(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    std::string raw = cfg.get_str("user." + std::to_string(u), "");
    if (raw.empty()) throw std::runtime_error("scenario: missing user " + std::to_string(u));
    std::istringstream ls(raw);
    std::string field;
    User usr{static_cast<std::uint32_t>(u), 0.0, 0.0, 0};
    std::getline(ls, field, ',');
    usr.theta = std::stod(field);
    std::getline(ls, field, ',');
    usr.sensing_range_m = std::stod(field);
    std::getline(ls, field, ',');
    usr.location = static_cast<std::uint32_t>(std::stoul(field));
    s.population.users.push_back(usr);
  }

  int arrivals = cfg.get_int("arrival.count", 0);
  s.arrivals.reserve(static_cast<std::size_t>(arrivals));
  for (int k = 0; k < arrivals; ++k) {
    std::string raw = cfg.get_str("arrival." + std::to_string(k), "");
    if (raw.empty()) throw std::runtime_error("scenario: missing arrival " + std::to_string(k));
    std::istringstream ls(raw);
    std::string field;
    std::getline(ls, field, ',');
    int t = std::stoi(field);
    std::getline(ls, field, ',');
    auto uid = static_cast<std::uint32_t>(std::stoul(field));
    if (uid >= s.population.users.size()) {
      throw std::runtime_error("scenario: arrival references unknown user");
    }
    s.arrivals.push_back({t, s.population.users[uid]});
  }
  return s;
}

}  // namespace bbs
