#include "odta/cli.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace odta {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T value{};
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw std::invalid_argument("bad value for " + std::string(key) + ": " + s);
  return value;
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw std::invalid_argument("bad value for " + std::string(key) + ": " + std::string(s));
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

}  // namespace

std::vector<int> parse_n_values(std::string_view text) {
  const std::string s = trim(text);
  const auto dots = s.find("..");
  std::vector<int> out;
  if (dots == std::string::npos) {
    for (const auto& item : split_list(s)) out.push_back(parse_number<int>("n", item));
  } else {
    const int lo = parse_number<int>("n", s.substr(0, dots));
    std::string rest = s.substr(dots + 2);
    int step = 40;
    const auto kw = rest.find("step");
    if (kw != std::string::npos) {
      step = parse_number<int>("n step", rest.substr(kw + 4));
      rest = rest.substr(0, kw);
    }
    const int hi = parse_number<int>("n", rest);
    if (step <= 0 || hi < lo) throw std::invalid_argument("bad n range: " + s);
    for (int n = lo; n <= hi; n += step) out.push_back(n);
  }
  for (const int n : out)
    if (n <= 0) throw std::invalid_argument("n_requests must be positive");
  return out;
}

RunManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  RunManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "map") {
      m.map = resolve(base_dir, value);
    } else if (key == "fleet") {
      m.fleets.clear();
      for (const auto& v : split_list(value)) m.fleets.push_back(parse_fleet(v));
    } else if (key == "deadline") {
      m.deadlines.clear();
      for (const auto& v : split_list(value)) m.deadlines.push_back(parse_deadline_mode(v));
    } else if (key == "n" || key == "n_requests") {
      m.n_values = parse_n_values(value);
    } else if (key == "policy" || key == "policies") {
      m.policies.clear();
      for (const auto& v : split_list(value)) m.policies.push_back(parse_policy(v));
    } else if (key == "trials") {
      m.trials = parse_number<int>(key, value);
    } else if (key == "seed") {
      m.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "out") {
      m.out = resolve(base_dir, value);
    } else if (key == "arrival_gap") {
      m.arrival_gap_max = parse_number<double>(key, value);
    } else if (key == "demand") {
      const auto parts = split_list(value);
      if (parts.size() != 2) throw std::invalid_argument("demand expects min,max");
      m.demand_min = parse_number<double>(key, parts[0]);
      m.demand_max = parse_number<double>(key, parts[1]);
    } else if (key == "hard_fraction") {
      m.hard_fraction = parse_number<double>(key, value);
    } else if (key == "mu") {
      m.energy.mu = parse_number<double>(key, value);
    } else if (key == "g") {
      m.energy.g = parse_number<double>(key, value);
    } else if (key == "charge_s") {
      m.energy.charge_s = parse_number<double>(key, value);
    } else if (key == "requests") {
      m.requests = resolve(base_dir, value);
    } else if (key == "traces") {
      m.traces = parse_bool(key, value);
    } else if (key == "auction_trace") {
      m.auction_trace = parse_bool(key, value);
    } else {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  return parse_manifest(in, path.parent_path());
}

void apply(const Overrides& ov, RunManifest& m) {
  if (ov.seed) m.seed = *ov.seed;
  if (ov.trials) m.trials = *ov.trials;
  if (ov.out) m.out = *ov.out;
  if (ov.policies) m.policies = *ov.policies;
}

ScenarioConfig RunManifest::scenario(FleetScenario fleet, DeadlineMode mode, int n,
                                     std::uint64_t trial_seed) const {
  ScenarioConfig c;
  c.fleet = fleet;
  c.deadline = mode;
  c.n_requests = n;
  c.seed = trial_seed;
  c.trials = 1;
  c.arrival_gap_max = arrival_gap_max;
  c.demand_min = demand_min;
  c.demand_max = demand_max;
  c.hard_probability = hard_fraction;
  c.energy = energy;
  c.requests_log = requests.string();
  return c;
}

void RunManifest::validate() const {
  if (map.empty()) throw std::invalid_argument("manifest names no map");
  if (fleets.empty() || deadlines.empty() || n_values.empty())
    throw std::invalid_argument("manifest has no scenario");
  if (policies.empty()) throw std::invalid_argument("manifest has no policy");
  if (trials <= 0) throw std::invalid_argument("trials must be positive");
  for (const int n : n_values)
    if (n <= 0) throw std::invalid_argument("n_requests must be positive");
  scenario(fleets.front(), deadlines.front(), n_values.front(), seed).validate();
}

}  // namespace odta
