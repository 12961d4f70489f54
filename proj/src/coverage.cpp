#include "bbs/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bbs {

namespace {

std::uint64_t lattice_key(std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy));
}

}  // namespace

AoiGrid AoiGrid::manhattan(int avenues, int streets, double avenue_len_m,
                           double street_len_m, double spacing_m) {
  if (spacing_m <= 0.0) throw std::invalid_argument("grid: spacing must be positive");
  if (avenues < 0 || streets < 0) throw std::invalid_argument("grid: negative road count");
  if (avenues == 0 && streets == 0) throw std::invalid_argument("grid: no roads");

  auto road_points = [&](int count, double len) -> std::size_t {
    if (count == 0) return 0;
    if (len <= 0.0) throw std::invalid_argument("grid: road length must be positive");
    auto n = static_cast<std::int64_t>(std::llround(len / spacing_m));
    if (n < 1) throw std::invalid_argument("grid: road shorter than spacing");
    return static_cast<std::size_t>(n);
  };

  AoiGrid g;
  g.spacing_ = spacing_m;
  g.avenues_ = avenues;
  g.streets_ = streets;
  g.avenue_pts_ = road_points(avenues, avenue_len_m);
  g.street_pts_ = road_points(streets, street_len_m);

  // Row/column positions: roads are spread evenly across the crossing road's
  // extent so every nominal crossing lands on a shared lattice point.
  auto spread = [](int count, std::size_t extent_pts) {
    std::vector<std::int64_t> pos(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
      if (extent_pts == 0) {
        pos[static_cast<std::size_t>(j)] = j;  // parallel roads only, rows arbitrary
      } else if (count == 1) {
        pos[static_cast<std::size_t>(j)] = 0;
      } else {
        pos[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(
            (static_cast<std::uint64_t>(j) * (extent_pts - 1)) /
            static_cast<std::uint64_t>(count - 1));
      }
    }
    return pos;
  };
  if (streets > 0 && g.street_pts_ < static_cast<std::size_t>(avenues)) {
    throw std::invalid_argument("grid: more avenues than street points");
  }
  if (avenues > 0 && streets > 0 && g.avenue_pts_ < static_cast<std::size_t>(streets)) {
    throw std::invalid_argument("grid: more streets than avenue points");
  }
  std::vector<std::int64_t> avenue_rows = spread(avenues, streets > 0 ? g.street_pts_ : 0);
  std::vector<std::int64_t> street_cols = spread(streets, avenues > 0 ? g.avenue_pts_ : 0);

  auto add_point = [&](std::int64_t ix, std::int64_t iy) -> bool {
    std::uint64_t key = lattice_key(ix, iy);
    if (g.index_.count(key)) return false;
    auto id = static_cast<std::uint32_t>(g.points_.size());
    g.index_.emplace(key, id);
    g.points_.push_back({id, static_cast<double>(ix) * spacing_m,
                         static_cast<double>(iy) * spacing_m});
    g.ix_.push_back(ix);
    g.iy_.push_back(iy);
    return true;
  };

  for (std::int64_t row : avenue_rows) {
    for (std::size_t ix = 0; ix < g.avenue_pts_; ++ix) {
      add_point(static_cast<std::int64_t>(ix), row);
    }
  }
  std::size_t dups = 0;
  for (std::int64_t col : street_cols) {
    for (std::size_t iy = 0; iy < g.street_pts_; ++iy) {
      if (!add_point(col, static_cast<std::int64_t>(iy))) ++dups;
    }
  }
  g.intersections_ = dups;

  // Adjacency along roads: horizontal steps only on avenue rows, vertical
  // steps only on street columns.
  std::set<std::int64_t> rows(avenue_rows.begin(), avenue_rows.end());
  std::set<std::int64_t> cols(street_cols.begin(), street_cols.end());
  g.adj_.resize(g.points_.size());
  for (std::size_t p = 0; p < g.points_.size(); ++p) {
    std::int64_t ix = g.ix_[p];
    std::int64_t iy = g.iy_[p];
    if (rows.count(iy)) {
      for (std::int64_t dx : {-1, 1}) {
        auto it = g.index_.find(lattice_key(ix + dx, iy));
        if (it != g.index_.end()) g.adj_[p].push_back(it->second);
      }
    }
    if (cols.count(ix)) {
      for (std::int64_t dy : {-1, 1}) {
        auto it = g.index_.find(lattice_key(ix, iy + dy));
        if (it != g.index_.end()) g.adj_[p].push_back(it->second);
      }
    }
    std::sort(g.adj_[p].begin(), g.adj_[p].end());
  }
  return g;
}

const std::vector<std::uint32_t>& AoiGrid::neighbors(std::uint32_t id) const {
  if (id >= points_.size()) throw std::invalid_argument("grid: point id out of range");
  return adj_[id];
}

std::optional<std::uint32_t> AoiGrid::point_at_lattice(std::int64_t ix,
                                                       std::int64_t iy) const {
  auto it = index_.find(lattice_key(ix, iy));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::pair<std::int64_t, std::int64_t> AoiGrid::lattice_of(std::uint32_t id) const {
  if (id >= points_.size()) throw std::invalid_argument("grid: point id out of range");
  return {ix_[id], iy_[id]};
}

std::vector<std::uint32_t> AoiGrid::points_within(std::uint32_t center,
                                                  double radius_m) const {
  auto [cx, cy] = lattice_of(center);
  auto r = static_cast<std::int64_t>(std::floor(radius_m / spacing_));
  double r2 = radius_m * radius_m;
  std::vector<std::uint32_t> out;
  for (std::int64_t dx = -r; dx <= r; ++dx) {
    for (std::int64_t dy = -r; dy <= r; ++dy) {
      double d2 = (static_cast<double>(dx) * spacing_) * (static_cast<double>(dx) * spacing_) +
                  (static_cast<double>(dy) * spacing_) * (static_cast<double>(dy) * spacing_);
      if (d2 > r2) continue;
      auto it = index_.find(lattice_key(cx + dx, cy + dy));
      if (it != index_.end()) out.push_back(it->second);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void AoiGrid::write_points(std::ostream& out) const {
  out << "id,x,y\n";
  char buf[96];
  for (const GridPoint& p : points_) {
    std::snprintf(buf, sizeof(buf), "%u,%.10g,%.10g\n", p.id, p.x, p.y);
    out << buf;
  }
}

std::vector<GridPoint> AoiGrid::read_points(std::istream& in) {
  std::vector<GridPoint> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("id,", 0) == 0) continue;  // header
    }
    std::istringstream ls(line);
    std::string field;
    GridPoint p{};
    if (!std::getline(ls, field, ',')) throw std::runtime_error("grid: bad point line");
    p.id = static_cast<std::uint32_t>(std::stoul(field));
    if (!std::getline(ls, field, ',')) throw std::runtime_error("grid: bad point line");
    p.x = std::stod(field);
    if (!std::getline(ls, field, ',')) throw std::runtime_error("grid: bad point line");
    p.y = std::stod(field);
    out.push_back(p);
  }
  return out;
}

void SensingProfile::normalize() {
  std::sort(covered.begin(), covered.end());
  covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
}

void Selection::add(std::uint32_t user, SensingProfile profile) {
  if (contains(user)) throw std::invalid_argument("selection: duplicate member");
  profile.normalize();
  members_.push_back(user);
  profiles_.emplace(user, std::move(profile));
}

bool Selection::contains(std::uint32_t user) const {
  return profiles_.count(user) > 0;
}

const SensingProfile& Selection::profile(std::uint32_t user) const {
  auto it = profiles_.find(user);
  if (it == profiles_.end()) throw std::invalid_argument("selection: unknown member");
  return it->second;
}

std::uint64_t coverage_utility(const Selection& sel, const AoiGrid& grid) {
  CoverageAccumulator acc(grid.point_count());
  for (std::uint32_t user : sel.members()) acc.add(sel.profile(user));
  return acc.covered_count();
}

std::uint64_t marginal_utility(std::uint32_t user, const SensingProfile& profile,
                               const Selection& sel, const AoiGrid& grid) {
  if (sel.contains(user)) throw std::invalid_argument("selection: duplicate member");
  CoverageAccumulator acc(grid.point_count());
  for (std::uint32_t m : sel.members()) acc.add(sel.profile(m));
  return acc.marginal(profile);
}

CoverageAccumulator::CoverageAccumulator(std::size_t point_count)
    : covered_(point_count, 0) {}

void CoverageAccumulator::check(const SensingProfile& profile) const {
  for (std::uint32_t p : profile.covered) {
    if (p >= covered_.size()) {
      throw std::invalid_argument("profile: point id outside the grid");
    }
  }
}

std::uint64_t CoverageAccumulator::marginal(const SensingProfile& profile) const {
  check(profile);
  std::uint64_t gain = 0;
  for (std::uint32_t p : profile.covered) {
    if (!covered_[p]) ++gain;
  }
  return gain;
}

void CoverageAccumulator::add(const SensingProfile& profile) {
  check(profile);
  for (std::uint32_t p : profile.covered) {
    if (!covered_[p]) {
      covered_[p] = 1;
      ++count_;
    }
  }
}

void CoverageAccumulator::reset() {
  std::fill(covered_.begin(), covered_.end(), 0);
  count_ = 0;
}

}  // namespace bbs
