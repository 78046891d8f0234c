#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odta {

/// Zero-based grid cell, column then row.
struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Length of an 8-connected path as a count of straight and diagonal moves.
/// Keeping the counts integral lets two different search routes agree on the
/// resulting float bit for bit.
struct OctileCost {
  long straight = 0;
  long diagonal = 0;

  double units() const;
  double meters(double resolution) const { return units() * resolution; }
  OctileCost operator+(const OctileCost& o) const {
    return {straight + o.straight, diagonal + o.diagonal};
  }
};

/// Octile distance between two cells ignoring obstacles.
OctileCost octile(Cell a, Cell b);

struct NamedLocation {
  std::string name;
  Cell cell;
};

class GridWorld {
 public:
  /// Validates: positive resolution, occupancy sized width*height, every
  /// location and depot in bounds and free, at least one depot.
  GridWorld(int width, int height, double resolution, std::vector<bool> occupancy,
            std::vector<NamedLocation> locations, std::vector<Cell> depots);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  bool blocked(Cell c) const { return blocked_[index(c)]; }
  bool walkable(Cell c) const { return in_bounds(c) && !blocked(c); }

  const std::vector<NamedLocation>& locations() const { return locations_; }
  const std::vector<Cell>& depots() const { return depots_; }

  /// Throws std::out_of_range for an unknown name.
  Cell location(std::string_view name) const;
  bool has_location(std::string_view name) const;

  /// Depots are named Dock1, Dock2, ... in file order.
  static std::string depot_name(std::size_t i);
  /// Index of a depot by its Dock<k> name; throws std::out_of_range.
  std::size_t depot_index(std::string_view name) const;

  /// Named locations followed by depots; the point set the simulator
  /// precomputes distances over.
  std::vector<Cell> sites() const;

 private:
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }

  int width_;
  int height_;
  double resolution_;
  std::vector<bool> blocked_;
  std::vector<NamedLocation> locations_;
  std::vector<Cell> depots_;
};

/// Parses the plain-text map format:
///   width height resolution
///   <height rows of '.'/'#'>
///   loc <name> <x> <y>
///   depot <x> <y>
/// Throws std::invalid_argument on malformed input or invariant violations.
GridWorld load_map(std::string_view text);
GridWorld load_map_file(const std::string& path);
std::string serialize_map(const GridWorld& world);

/// Shortest 8-connected path length between two free cells, found with jump
/// point search. Diagonal steps require both orthogonal neighbours free.
/// Returns nullopt when no path exists; throws std::invalid_argument for a
/// blocked or out-of-bounds endpoint.
std::optional<OctileCost> shortest_path_cost(const GridWorld& world, Cell a, Cell b);
std::optional<double> geodesic_distance(const GridWorld& world, Cell a, Cell b);

/// Symmetric point-to-point geodesic distances in meters; +inf when unreachable.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::vector<Cell> points, Eigen::MatrixXd dist);

  std::size_t size() const { return points_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return dist_(i, j); }
  const Eigen::MatrixXd& matrix() const { return dist_; }
  const std::vector<Cell>& points() const { return points_; }
  Cell point(std::size_t i) const { return points_[i]; }

  /// Throws std::out_of_range when the cell is not one of the points.
  std::size_t index_of(Cell c) const;
  std::optional<std::size_t> find(Cell c) const;

 private:
  std::vector<Cell> points_;
  Eigen::MatrixXd dist_;
};

DistanceMatrix precompute_distances(const GridWorld& world, std::span<const Cell> points);

struct DepotHit {
  std::size_t depot = 0;  // index into world.depots()
  double meters = 0.0;
};

/// Closest depot from a matrix point; ties go to the lower depot index.
/// Every depot must be a matrix point. Throws std::runtime_error when no depot
/// is reachable.
DepotHit nearest_depot(const GridWorld& world, Cell from, const DistanceMatrix& matrix);

}  // namespace odta
