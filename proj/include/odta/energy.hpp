#pragma once

#include "odta/model.hpp"

namespace odta {

class GridWorld;
class DistanceMatrix;

struct EnergyParams {
  double mu = 0.02;          // friction coefficient
  double g = 9.81;           // m/s^2
  double charge_s = 300.0;   // fixed recharge duration

  void validate() const;
};

/// Steady friction power of an unloaded robot at its class speed: mu*g*v*W.
double power_at_velocity(const RobotClassSpec& spec, const EnergyParams& params);

/// Full-charge energy divided by cruise power. Throws std::domain_error on
/// zero power.
double estimated_travel_time(const RobotClassSpec& spec, const EnergyParams& params);

/// Energy of one leg at total mass (robot plus loaded payload):
///   0.5*m*v^2 + mu*g*m*v*t, and zero for an idle leg (v == 0 or t == 0).
double leg_energy(double mass_total, double v, double t, const EnergyParams& params);

/// Cruise power times the time to reach the nearest depot from `site`.
double min_return_energy(SiteId site, const RobotClassSpec& spec, const GridWorld& world,
                         const DistanceMatrix& matrix, const EnergyParams& params);

/// Fraction of all request types this class can serve.
double robot_efficiency(const RobotClassSpec& spec, const RequestTypeCatalog& catalog);

}  // namespace odta
