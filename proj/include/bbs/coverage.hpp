// Point-coverage utility over road-grid sensing profiles.
//
// An area of interest is a set of discrete points laid out on road lines
// (avenues run along x, streets along y, shared crossings deduplicated).
// The platform's value for a set of users is the number of distinct points
// their sensing profiles cover; it is monotone submodular.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

namespace bbs {

struct GridPoint {
  std::uint32_t id;
  double x;
  double y;
};

class AoiGrid {
 public:
  AoiGrid() = default;  // empty grid; fill via manhattan()

  // Canonical deterministic layout: `avenues` horizontal lines whose rows are
  // evenly spread across the street extent, `streets` vertical lines spread
  // across the avenue extent. Road lengths are in meters; every road carries
  // round(len/spacing) points. Throws std::invalid_argument on bad dimensions
  // (zero spacing, no roads, more roads than crossing slots).
  static AoiGrid manhattan(int avenues, int streets, double avenue_len_m,
                           double street_len_m, double spacing_m);

  std::size_t point_count() const { return points_.size(); }
  const std::vector<GridPoint>& points() const { return points_; }
  double spacing() const { return spacing_; }
  int avenues() const { return avenues_; }
  int streets() const { return streets_; }
  std::size_t avenue_points() const { return avenue_pts_; }
  std::size_t street_points() const { return street_pts_; }
  std::size_t intersection_count() const { return intersections_; }

  // Road-adjacent points (along the same avenue/street), up to four.
  const std::vector<std::uint32_t>& neighbors(std::uint32_t id) const;

  std::optional<std::uint32_t> point_at_lattice(std::int64_t ix, std::int64_t iy) const;
  std::pair<std::int64_t, std::int64_t> lattice_of(std::uint32_t id) const;

  // All points within Euclidean radius of a center point.
  std::vector<std::uint32_t> points_within(std::uint32_t center, double radius_m) const;

  // Snapshot export/import, one `id,x,y` line per point.
  void write_points(std::ostream& out) const;
  static std::vector<GridPoint> read_points(std::istream& in);

 private:
  double spacing_ = 1.0;
  int avenues_ = 0;
  int streets_ = 0;
  std::size_t avenue_pts_ = 0;
  std::size_t street_pts_ = 0;
  std::size_t intersections_ = 0;
  std::vector<GridPoint> points_;
  std::vector<std::int64_t> ix_;
  std::vector<std::int64_t> iy_;
  std::vector<std::vector<std::uint32_t>> adj_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

// The set of points one user's submission covers.
struct SensingProfile {
  std::vector<std::uint32_t> covered;  // sorted, unique

  void normalize();
  bool empty() const { return covered.empty(); }
  std::size_t size() const { return covered.size(); }
};

// Ordered set of users with their profiles.
class Selection {
 public:
  void add(std::uint32_t user, SensingProfile profile);
  bool contains(std::uint32_t user) const;
  const std::vector<std::uint32_t>& members() const { return members_; }
  const SensingProfile& profile(std::uint32_t user) const;
  std::size_t size() const { return members_.size(); }

 private:
  std::vector<std::uint32_t> members_;
  std::unordered_map<std::uint32_t, SensingProfile> profiles_;
};

// |union of covered sets|. Throws std::invalid_argument when a profile
// references a point outside the grid.
std::uint64_t coverage_utility(const Selection& sel, const AoiGrid& grid);

// |profile \ union of sel|. Throws std::invalid_argument when `user` is
// already selected or the profile is invalid against the grid.
std::uint64_t marginal_utility(std::uint32_t user, const SensingProfile& profile,
                               const Selection& sel, const AoiGrid& grid);

// Incremental covered-set bitmap for greedy loops; equivalent to the naive
// recompute path, which stays around as the test oracle.
class CoverageAccumulator {
 public:
  explicit CoverageAccumulator(std::size_t point_count);

  std::uint64_t covered_count() const { return count_; }
  std::uint64_t marginal(const SensingProfile& profile) const;
  void add(const SensingProfile& profile);
  void reset();

 private:
  void check(const SensingProfile& profile) const;
  std::vector<char> covered_;
  std::uint64_t count_ = 0;
};

}  // namespace bbs
