#include "odta/energy.hpp"

#include "odta/world.hpp"

#include <stdexcept>

namespace odta {

void EnergyParams::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(g > 0.0)) throw std::invalid_argument("g must be positive");
  if (!(charge_s > 0.0)) throw std::invalid_argument("charge duration must be positive");
}

double power_at_velocity(const RobotClassSpec& spec, const EnergyParams& params) {
  return params.mu * params.g * spec.speed * spec.weight;
}

double estimated_travel_time(const RobotClassSpec& spec, const EnergyParams& params) {
  const double p = power_at_velocity(spec, params);
  if (!(p > 0.0)) throw std::domain_error("robot class has zero cruise power");
  return spec.energy / p;
}

double leg_energy(double mass_total, double v, double t, const EnergyParams& params) {
  if (v == 0.0 || t == 0.0) return 0.0;
  return 0.5 * mass_total * v * v + params.mu * params.g * mass_total * v * t;
}

double min_return_energy(SiteId site, const RobotClassSpec& spec, const GridWorld& world,
                         const DistanceMatrix& matrix, const EnergyParams& params) {
  const auto hit = nearest_depot(world, matrix.point(site), matrix);
  return power_at_velocity(spec, params) * hit.meters / spec.speed;
}

double robot_efficiency(const RobotClassSpec& spec, const RequestTypeCatalog& catalog) {
  if (catalog.types.empty()) throw std::invalid_argument("empty request-type catalog");
  return static_cast<double>(spec.abilities.size()) / static_cast<double>(catalog.types.size());
}

}  // namespace odta
