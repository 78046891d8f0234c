#include "odta/cli.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace odta;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("odta_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_manifest(const fs::path& dir, const std::string& body) {
  const auto p = dir / "run.manifest";
  std::ofstream(p) << "map=" << testing::hospital_map_path() << '\n' << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

MetricsRow row(Policy p, int n, std::uint64_t seed, int rejected, double penalty) {
  MetricsRow r;
  r.policy = p;
  r.n_requests = n;
  r.seed = seed;
  r.rejected = rejected;
  r.cum_penalty = penalty;
  return r;
}

}  // namespace

TEST_CASE("n value syntax") {
  CHECK(parse_n_values("40..280 step 40") == std::vector<int>{40, 80, 120, 160, 200, 240, 280});
  CHECK(parse_n_values("40..120") == std::vector<int>{40, 80, 120});
  CHECK(parse_n_values("40, 80") == std::vector<int>{40, 80});
  CHECK_THROWS_WITH_AS(parse_n_values("0"), "n_requests must be positive", std::invalid_argument);
  CHECK_THROWS_AS(parse_n_values("80..40"), std::invalid_argument);
}

TEST_CASE("manifest parsing") {
  std::istringstream in(
      "# battery\nmap = maps/h.map\nfleet=equal,unequal\ndeadline=2E\nn=40..80\n"
      "policy=hmrodta,greedy\ntrials=3\nseed=9\ndemand=2,30\ncharge_s=120\n");
  const auto m = parse_manifest(in, "/base");
  CHECK(m.map == fs::path("/base/maps/h.map"));
  CHECK(m.fleets.size() == 2);
  CHECK(m.deadlines == std::vector<DeadlineMode>{DeadlineMode::TwoE});
  CHECK(m.n_values == std::vector<int>{40, 80});
  CHECK(m.policies.size() == 2);
  CHECK(m.trials == 3);
  CHECK(m.seed == 9);
  CHECK(m.demand_min == 2.0);
  CHECK(m.energy.charge_s == 120.0);
  const auto sc = m.scenario(FleetScenario::UnequalRobots, DeadlineMode::E, 80, 11);
  CHECK(sc.seed == 11);
  CHECK(sc.demand_max == 30.0);

  std::istringstream bad("colour=blue\n");
  CHECK_THROWS_AS(parse_manifest(bad), std::invalid_argument);
  std::istringstream bad_value("trials=many\n");
  CHECK_THROWS_AS(parse_manifest(bad_value), std::invalid_argument);

  RunManifest o;
  Overrides ov;
  ov.seed = 77;
  ov.policies = std::vector<Policy>{Policy::GreedyFCFS};
  apply(ov, o);
  CHECK(o.seed == 77);
  CHECK(o.policies == std::vector<Policy>{Policy::GreedyFCFS});
}

TEST_CASE("percentage difference") {
  CHECK(percentage_difference(5, 10) == doctest::Approx(66.6667).epsilon(1e-5));
  CHECK(percentage_difference(10, 5) == percentage_difference(5, 10));
  CHECK(percentage_difference(0, 0) == 0.0);
  CHECK(percentage_difference(0, 4) == 200.0);
}

TEST_CASE("difference table") {
  const std::vector<MetricsRow> two{row(Policy::HMRODTA, 40, 1, 5, 100),
                                    row(Policy::GreedyFCFS, 40, 1, 10, 300),
                                    row(Policy::HMRODTA, 280, 1, 0, 0),
                                    row(Policy::GreedyFCFS, 280, 1, 0, 0)};
  std::ostringstream out;
  write_pctdiff_csv(out, two);
  const auto t = csv(out.str());
  REQUIRE(t.size() == 3);
  CHECK(t[0] == std::vector<std::string>{"fleet", "deadline_mode", "metric", "policy_a",
                                         "policy_b", "pct_40_160", "pct_160_280"});
  std::map<std::string, std::vector<std::string>> by_metric{{t[1][2], t[1]}, {t[2][2], t[2]}};
  CHECK(std::stod(by_metric["rejected"][5]) == doctest::Approx(66.666667));
  CHECK(std::stod(by_metric["penalty"][5]) == doctest::Approx(100.0));
  CHECK(std::stod(by_metric["rejected"][6]) == 0.0);

  const std::vector<MetricsRow> one{row(Policy::HMRODTA, 40, 1, 5, 100)};
  std::ostringstream single;
  write_pctdiff_csv(single, one);
  CHECK(csv(single.str()).size() == 1);  // header only
}

TEST_CASE("summary statistics") {
  const std::vector<MetricsRow> rows{row(Policy::HMRODTA, 40, 1, 2, 10.0),
                                     row(Policy::HMRODTA, 40, 2, 4, 30.0),
                                     row(Policy::HMRODTA, 80, 1, 9, 0.0)};
  const auto s = summarize(rows);
  REQUIRE(s.size() == 2);
  CHECK(s[0].n_requests == 40);
  CHECK(s[0].trials == 2);
  CHECK(s[0].mean_rejected == 3.0);
  CHECK(s[0].sd_rejected == doctest::Approx(std::sqrt(2.0)));
  CHECK(s[0].mean_penalty == 20.0);
  CHECK(s[1].sd_rejected == 0.0);

  std::ostringstream out;
  write_metrics_csv(out, rows);
  std::istringstream back(out.str());
  const auto again = read_metrics_csv(back);
  REQUIRE(again.size() == 3);
  CHECK(again[1].cum_penalty == 30.0);
  CHECK(again[1].seed == 2);
  std::istringstream junk("seed,policy\n1,2\n");
  CHECK_THROWS_AS(read_metrics_csv(junk), std::runtime_error);
}

TEST_CASE("run writes one row per trial and policy") {
  const auto dir = scratch("run");
  const auto manifest =
      write_manifest(dir, "fleet=equal\ndeadline=2E\nn=40\npolicy=hmrodta,greedy\ntrials=2\n"
                          "seed=5\nout=out\nauction_trace=true\n");
  std::ostringstream log, err;
  REQUIRE(cmd_run(manifest, {}, log, err) == 0);
  CHECK(err.str().empty());
  const auto metrics = csv(slurp(dir / "out" / "metrics.csv"));
  REQUIRE(metrics.size() == 5);
  CHECK(metrics[0].size() == 8);
  int traces = 0;
  for (const auto& e : fs::directory_iterator(dir / "out" / "traces")) traces += e.is_regular_file();
  CHECK(traces == 4);
  CHECK(fs::exists(dir / "out" / "traces" / "hmrodta_equal_2E_n40_seed6.csv"));
  CHECK(fs::exists(dir / "out" / "auctions" / "hmrodta_equal_2E_n40_seed5.csv"));
  CHECK(csv(slurp(dir / "out" / "summary.csv")).size() == 3);

  // report means equal a recomputation from the raw rows
  REQUIRE(cmd_report(dir / "out", {}, log, err) == 0);
  const auto summary = csv(slurp(dir / "out" / "summary.csv"));
  for (std::size_t i = 1; i < summary.size(); ++i) {
    double rej = 0, pen = 0;
    int count = 0;
    for (std::size_t k = 1; k < metrics.size(); ++k) {
      if (metrics[k][1] != summary[i][0]) continue;
      rej += std::stod(metrics[k][6]);
      pen += std::stod(metrics[k][5]);
      ++count;
    }
    CHECK(count == 2);
    CHECK(std::stod(summary[i][5]) == doctest::Approx(rej / count));
    CHECK(std::stod(summary[i][7]) == doctest::Approx(pen / count));
  }
  CHECK(csv(slurp(dir / "out" / "pctdiff.csv")).size() == 3);

  // overrides
  Overrides ov;
  ov.out = dir / "again";
  ov.policies = std::vector<Policy>{Policy::GreedyFCFS};
  ov.trials = 1;
  REQUIRE(cmd_run(manifest, ov, log, err) == 0);
  CHECK(csv(slurp(dir / "again" / "metrics.csv")).size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("run is byte-reproducible") {
  const auto dir = scratch("repro");
  const auto manifest = write_manifest(
      dir, "fleet=equal,unequal\ndeadline=E,U1to10E\nn=40,80\npolicy=hmrodta,greedy\nseed=3\n");
  std::ostringstream log, err;
  Overrides a, b;
  a.out = dir / "a";
  b.out = dir / "b";
  REQUIRE(cmd_run(manifest, a, log, err) == 0);
  REQUIRE(cmd_run(manifest, b, log, err) == 0);
  REQUIRE(cmd_report(dir / "a", {}, log, err) == 0);
  REQUIRE(cmd_report(dir / "b", {}, log, err) == 0);
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir / "a");
    CHECK(slurp(e.path()) == slurp(dir / "b" / rel));
    ++compared;
  }
  CHECK(compared == 3 + 16);
  fs::remove_all(dir);
}

TEST_CASE("run failures leave no CSV") {
  const auto dir = scratch("fail");
  {
    std::ofstream(dir / "m.manifest") << "map=missing.map\nout=out\n";
  }
  std::ostringstream log, err;
  CHECK(cmd_run(dir / "m.manifest", {}, log, err) != 0);
  CHECK_FALSE(err.str().empty());
  CHECK_FALSE(fs::exists(dir / "out" / "metrics.csv"));

  const auto zero = write_manifest(dir, "n=0\n");
  std::ostringstream err2;
  CHECK(cmd_run(zero, {}, log, err2) != 0);
  CHECK(err2.str().find("n_requests must be positive") != std::string::npos);

  CHECK(cmd_run(dir / "absent.manifest", {}, log, err) != 0);
  CHECK(cmd_report(dir, {}, log, err) != 0);  // no metrics files
  fs::remove_all(dir);
}

TEST_CASE("gen writes a replayable log") {
  const auto dir = scratch("gen");
  const auto manifest = write_manifest(dir, "n=40\nseed=7\nout=gen\n");
  std::ostringstream log, err;
  REQUIRE(cmd_gen(manifest, {}, log, err) == 0);
  const auto first = slurp(dir / "gen" / "requests.csv");
  Overrides ov;
  ov.out = dir / "second.csv";
  REQUIRE(cmd_gen(manifest, ov, log, err) == 0);
  CHECK(slurp(dir / "second.csv") == first);
  std::istringstream in(first);
  const auto reqs = read_request_log(in);
  CHECK(reqs.size() == 40);

  // replaying the log reproduces the generated run
  const auto plain = write_manifest(dir, "n=40\nseed=7\npolicy=hmrodta\nout=plain\n");
  REQUIRE(cmd_run(plain, {}, log, err) == 0);
  std::ofstream(dir / "replay.manifest") << "map=" << testing::hospital_map_path()
                                         << "\nn=40\nseed=7\nrequests=second.csv\nout=replay\n";
  REQUIRE(cmd_run(dir / "replay.manifest", {}, log, err) == 0);
  CHECK(slurp(dir / "plain" / "metrics.csv") == slurp(dir / "replay" / "metrics.csv"));

  const auto zero = write_manifest(dir, "n=0\n");
  std::ostringstream err2;
  CHECK(cmd_gen(zero, {}, log, err2) != 0);
  CHECK(err2.str().find("n_requests must be positive") != std::string::npos);
  fs::remove_all(dir);
}
