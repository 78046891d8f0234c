#pragma once

#include "odta/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace odta {

/// A battery of trials: the cross product of fleets, deadline modes, request
/// counts, policies and `trials` consecutive seeds starting at `seed`.
struct RunManifest {
  std::filesystem::path map;
  std::vector<FleetScenario> fleets{FleetScenario::EqualRobots};
  std::vector<DeadlineMode> deadlines{DeadlineMode::E};
  std::vector<int> n_values{40};
  std::vector<Policy> policies{Policy::HMRODTA};
  int trials = 1;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  double arrival_gap_max = 10.0;
  double demand_min = 1.0;
  double demand_max = 60.0;
  double hard_fraction = 0.5;
  EnergyParams energy;
  std::filesystem::path requests;  // replay log, optional
  bool traces = true;
  bool auction_trace = false;

  /// Scenario for one cell of the battery; map path left empty.
  ScenarioConfig scenario(FleetScenario fleet, DeadlineMode mode, int n, std::uint64_t seed) const;
  /// Throws std::invalid_argument.
  void validate() const;
};

/// Flat `key=value` lines; `#` starts a comment. Relative paths resolve
/// against `base_dir`. Throws std::invalid_argument on unknown keys or values.
RunManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
RunManifest load_manifest(const std::filesystem::path& path);

/// "40..280 step 40", "40..280" (step 40), or "40,80,120".
std::vector<int> parse_n_values(std::string_view text);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::filesystem::path> out;
  std::optional<std::vector<Policy>> policies;
};
void apply(const Overrides& ov, RunManifest& m);

struct MetricsRow {
  std::uint64_t seed = 0;
  Policy policy = Policy::HMRODTA;
  FleetScenario fleet = FleetScenario::EqualRobots;
  DeadlineMode deadline = DeadlineMode::E;
  int n_requests = 0;
  double cum_penalty = 0.0;
  int rejected = 0;
  int completed = 0;
};

inline constexpr const char* kMetricsHeader =
    "seed,policy,fleet,deadline_mode,n_requests,cum_penalty_s,rejected,completed";

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
/// Throws std::runtime_error on a malformed file.
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

struct SummaryRow {
  Policy policy = Policy::HMRODTA;
  FleetScenario fleet = FleetScenario::EqualRobots;
  DeadlineMode deadline = DeadlineMode::E;
  int n_requests = 0;
  int trials = 0;
  double mean_rejected = 0.0;
  double sd_rejected = 0.0;
  double mean_penalty = 0.0;
  double sd_penalty = 0.0;
};

/// Mean and sample standard deviation per (policy, fleet, deadline mode, n),
/// rows sorted by those keys; trials within a cell summed in seed order.
std::vector<SummaryRow> summarize(std::span<const MetricsRow> rows);
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

/// |a-b| / ((a+b)/2) * 100, and 0 when both are 0.
double percentage_difference(double a, double b);

/// Pairwise policy differences of mean rejected and mean penalty over the
/// request-count bands 40-160 and 160-280 (160 belongs to both).
void write_pctdiff_csv(std::ostream& out, std::span<const MetricsRow> rows);

/// Worker threads for trial fan-out: ODTA_THREADS when set to a positive
/// integer, else the hardware concurrency.
unsigned worker_count();

/// Commands return a process exit code and report problems on `err`.
int cmd_run(const std::filesystem::path& manifest, const Overrides& ov, std::ostream& log,
            std::ostream& err);
int cmd_gen(const std::filesystem::path& config, const Overrides& ov, std::ostream& log,
            std::ostream& err);
int cmd_report(const std::filesystem::path& dir, const Overrides& ov, std::ostream& log,
               std::ostream& err);

}  // namespace odta
