#include "odta/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace odta {

double OctileCost::units() const {
  return static_cast<double>(straight) + static_cast<double>(diagonal) * std::numbers::sqrt2;
}

OctileCost octile(Cell a, Cell b) {
  const long dx = std::abs(a.x - b.x);
  const long dy = std::abs(a.y - b.y);
  const long diag = std::min(dx, dy);
  return {std::max(dx, dy) - diag, diag};
}

GridWorld::GridWorld(int width, int height, double resolution, std::vector<bool> occupancy,
                     std::vector<NamedLocation> locations, std::vector<Cell> depots)
    : width_(width),
      height_(height),
      resolution_(resolution),
      blocked_(std::move(occupancy)),
      locations_(std::move(locations)),
      depots_(std::move(depots)) {
  if (width_ <= 0 || height_ <= 0) throw std::invalid_argument("map dimensions must be positive");
  if (!(resolution_ > 0.0)) throw std::invalid_argument("resolution must be positive");
  if (blocked_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
    throw std::invalid_argument("occupancy size does not match dimensions");
  if (depots_.empty()) throw std::invalid_argument("map has no depot");
  for (const auto& loc : locations_) {
    if (!in_bounds(loc.cell)) throw std::invalid_argument("location out of bounds: " + loc.name);
    if (blocked(loc.cell)) throw std::invalid_argument("location blocked: " + loc.name);
  }
  for (std::size_t i = 0; i < locations_.size(); ++i)
    for (std::size_t k = i + 1; k < locations_.size(); ++k)
      if (locations_[i].name == locations_[k].name)
        throw std::invalid_argument("duplicate location: " + locations_[i].name);
  for (const auto& d : depots_) {
    if (!in_bounds(d)) throw std::invalid_argument("depot out of bounds");
    if (blocked(d)) throw std::invalid_argument("depot blocked");
  }
}

Cell GridWorld::location(std::string_view name) const {
  for (const auto& loc : locations_)
    if (loc.name == name) return loc.cell;
  throw std::out_of_range("unknown location: " + std::string(name));
}

bool GridWorld::has_location(std::string_view name) const {
  return std::any_of(locations_.begin(), locations_.end(),
                     [&](const NamedLocation& l) { return l.name == name; });
}

std::string GridWorld::depot_name(std::size_t i) { return "Dock" + std::to_string(i + 1); }

std::size_t GridWorld::depot_index(std::string_view name) const {
  for (std::size_t i = 0; i < depots_.size(); ++i)
    if (depot_name(i) == name) return i;
  throw std::out_of_range("unknown depot: " + std::string(name));
}

std::vector<Cell> GridWorld::sites() const {
  std::vector<Cell> out;
  out.reserve(locations_.size() + depots_.size());
  for (const auto& loc : locations_) out.push_back(loc.cell);
  for (const auto& d : depots_) out.push_back(d);
  return out;
}

GridWorld load_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  int width = 0, height = 0;
  double resolution = 0.0;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty map document");
  {
    std::istringstream header(line);
    if (!(header >> width >> height >> resolution))
      throw std::invalid_argument("malformed map header");
    std::string extra;
    if (header >> extra) throw std::invalid_argument("malformed map header");
  }
  if (width <= 0 || height <= 0) throw std::invalid_argument("map dimensions must be positive");

  std::vector<bool> blocked;
  blocked.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int row = 0; row < height; ++row) {
    if (!std::getline(in, line)) throw std::invalid_argument("map has too few rows");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != width)
      throw std::invalid_argument("map row " + std::to_string(row) + " has wrong width");
    for (char c : line) {
      if (c == '.') blocked.push_back(false);
      else if (c == '#') blocked.push_back(true);
      else throw std::invalid_argument(std::string("bad map cell '") + c + "'");
    }
  }

  std::vector<NamedLocation> locations;
  std::vector<Cell> depots;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;
    if (kind == "loc") {
      NamedLocation loc;
      if (!(fields >> loc.name >> loc.cell.x >> loc.cell.y))
        throw std::invalid_argument("malformed loc line: " + line);
      locations.push_back(std::move(loc));
    } else if (kind == "depot") {
      Cell c;
      if (!(fields >> c.x >> c.y)) throw std::invalid_argument("malformed depot line: " + line);
      depots.push_back(c);
    } else {
      throw std::invalid_argument("unknown map directive: " + kind);
    }
    std::string extra;
    if (fields >> extra) throw std::invalid_argument("trailing tokens: " + line);
  }
  return GridWorld(width, height, resolution, std::move(blocked), std::move(locations),
                   std::move(depots));
}

GridWorld load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_map(buf.str());
}

std::string serialize_map(const GridWorld& world) {
  std::ostringstream out;
  out.precision(17);
  out << world.width() << ' ' << world.height() << ' ' << world.resolution() << '\n';
  for (int y = 0; y < world.height(); ++y) {
    for (int x = 0; x < world.width(); ++x) out << (world.blocked({x, y}) ? '#' : '.');
    out << '\n';
  }
  for (const auto& loc : world.locations())
    out << "loc " << loc.name << ' ' << loc.cell.x << ' ' << loc.cell.y << '\n';
  for (const auto& d : world.depots()) out << "depot " << d.x << ' ' << d.y << '\n';
  return out.str();
}

namespace {

int sign(int v) { return (v > 0) - (v < 0); }

class JumpPointSearch {
 public:
  JumpPointSearch(const GridWorld& world, Cell goal) : world_(world), goal_(goal) {}

  std::optional<OctileCost> run(Cell start) {
    const std::size_t n =
        static_cast<std::size_t>(world_.width()) * static_cast<std::size_t>(world_.height());
    best_.assign(n, std::nullopt);
    parent_.assign(n, Cell{-1, -1});
    closed_.assign(n, false);

    best_[idx(start)] = OctileCost{};
    open_.push({octile(start, goal_).units(), 0.0, start});
    while (!open_.empty()) {
      const Entry top = open_.top();
      open_.pop();
      if (closed_[idx(top.cell)]) continue;
      closed_[idx(top.cell)] = true;
      if (top.cell == goal_) return best_[idx(goal_)];
      expand(top.cell);
    }
    return std::nullopt;
  }

 private:
  struct Entry {
    double f;
    double g;
    Cell cell;
    bool operator>(const Entry& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g < o.g;  // prefer deeper nodes on ties
      return o.cell < cell;
    }
  };

  std::size_t idx(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(world_.width()) +
           static_cast<std::size_t>(c.x);
  }
  bool free(int x, int y) const { return world_.walkable({x, y}); }

  void expand(Cell c) {
    const OctileCost g = *best_[idx(c)];
    for (Cell dir : pruned_directions(c)) {
      auto jp = jump(c.x + dir.x, c.y + dir.y, dir.x, dir.y);
      if (!jp || closed_[idx(*jp)]) continue;
      const OctileCost cand = g + octile(c, *jp);
      auto& slot = best_[idx(*jp)];
      if (!slot || cand.units() < slot->units()) {
        slot = cand;
        parent_[idx(*jp)] = c;
        open_.push({cand.units() + octile(*jp, goal_).units(), cand.units(), *jp});
      }
    }
  }

  std::vector<Cell> pruned_directions(Cell c) const {
    std::vector<Cell> dirs;
    const Cell p = parent_[idx(c)];
    const int x = c.x, y = c.y;
    if (p.x < 0) {
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (dx != 0 && dy != 0 && !(free(x + dx, y) && free(x, y + dy))) continue;
          dirs.push_back({dx, dy});
        }
      return dirs;
    }
    const int dx = sign(x - p.x), dy = sign(y - p.y);
    if (dx != 0 && dy != 0) {
      const bool vertical = free(x, y + dy);
      const bool horizontal = free(x + dx, y);
      if (vertical) dirs.push_back({0, dy});
      if (horizontal) dirs.push_back({dx, 0});
      if (vertical && horizontal) dirs.push_back({dx, dy});
    } else if (dx != 0) {
      const bool next = free(x + dx, y);
      const bool up = free(x, y + 1);
      const bool down = free(x, y - 1);
      if (next) {
        dirs.push_back({dx, 0});
        if (up) dirs.push_back({dx, 1});
        if (down) dirs.push_back({dx, -1});
      }
      if (up) dirs.push_back({0, 1});
      if (down) dirs.push_back({0, -1});
    } else {
      const bool next = free(x, y + dy);
      const bool right = free(x + 1, y);
      const bool left = free(x - 1, y);
      if (next) {
        dirs.push_back({0, dy});
        if (right) dirs.push_back({1, dy});
        if (left) dirs.push_back({-1, dy});
      }
      if (right) dirs.push_back({1, 0});
      if (left) dirs.push_back({-1, 0});
    }
    return dirs;
  }

  std::optional<Cell> jump(int x, int y, int dx, int dy) const {
    while (true) {
      if (!free(x, y)) return std::nullopt;
      if (Cell{x, y} == goal_) return Cell{x, y};
      if (dx != 0 && dy != 0) {
        if (jump(x + dx, y, dx, 0) || jump(x, y + dy, 0, dy)) return Cell{x, y};
        if (!(free(x + dx, y) && free(x, y + dy))) return std::nullopt;
      } else if (dx != 0) {
        if ((free(x, y - 1) && !free(x - dx, y - 1)) || (free(x, y + 1) && !free(x - dx, y + 1)))
          return Cell{x, y};
      } else {
        if ((free(x - 1, y) && !free(x - 1, y - dy)) || (free(x + 1, y) && !free(x + 1, y - dy)))
          return Cell{x, y};
      }
      x += dx;
      y += dy;
    }
  }

  const GridWorld& world_;
  Cell goal_;
  std::vector<std::optional<OctileCost>> best_;
  std::vector<Cell> parent_;
  std::vector<bool> closed_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open_;
};

}  // namespace

std::optional<OctileCost> shortest_path_cost(const GridWorld& world, Cell a, Cell b) {
  if (!world.walkable(a) || !world.walkable(b))
    throw std::invalid_argument("path endpoint blocked or out of bounds");
  if (a == b) return OctileCost{};
  return JumpPointSearch(world, b).run(a);
}

std::optional<double> geodesic_distance(const GridWorld& world, Cell a, Cell b) {
  auto cost = shortest_path_cost(world, a, b);
  if (!cost) return std::nullopt;
  return cost->meters(world.resolution());
}

DistanceMatrix::DistanceMatrix(std::vector<Cell> points, Eigen::MatrixXd dist)
    : points_(std::move(points)), dist_(std::move(dist)) {
  const auto n = static_cast<Eigen::Index>(points_.size());
  if (dist_.rows() != n || dist_.cols() != n)
    throw std::invalid_argument("distance matrix shape mismatch");
}

std::optional<std::size_t> DistanceMatrix::find(Cell c) const {
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i] == c) return i;
  return std::nullopt;
}

std::size_t DistanceMatrix::index_of(Cell c) const {
  if (auto i = find(c)) return *i;
  throw std::out_of_range("cell is not a distance-matrix point");
}

DistanceMatrix precompute_distances(const GridWorld& world, std::span<const Cell> points) {
  for (Cell p : points)
    if (!world.walkable(p)) throw std::invalid_argument("distance point blocked or out of bounds");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      auto d = geodesic_distance(world, points[static_cast<std::size_t>(i)],
                                 points[static_cast<std::size_t>(k)]);
      const double v = d ? *d : std::numeric_limits<double>::infinity();
      dist(i, k) = v;
      dist(k, i) = v;
    }
  }
  return DistanceMatrix({points.begin(), points.end()}, std::move(dist));
}

DepotHit nearest_depot(const GridWorld& world, Cell from, const DistanceMatrix& matrix) {
  const std::size_t src = matrix.index_of(from);
  DepotHit best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < world.depots().size(); ++i) {
    const double d = matrix(src, matrix.index_of(world.depots()[i]));
    if (d < best.meters) best = {i, d};
  }
  if (!std::isfinite(best.meters)) throw std::runtime_error("no depot reachable");
  return best;
}

}  // namespace odta
