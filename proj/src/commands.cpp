#include "odta/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace odta {

namespace fs = std::filesystem;

unsigned worker_count() {
  if (const char* env = std::getenv("ODTA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Task {
  ScenarioConfig cfg;
  Policy policy = Policy::HMRODTA;
};

struct Outcome {
  Metrics metrics;
  std::vector<AuctionRound> rounds;
};

std::string trial_stem(const Task& t) {
  return std::string(to_string(t.policy)) + '_' + std::string(to_string(t.cfg.fleet)) + '_' +
         std::string(to_string(t.cfg.deadline)) + "_n" + std::to_string(t.cfg.n_requests) +
         "_seed" + std::to_string(t.cfg.seed);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

// Runs every task on a small worker pool; results keep task order.
std::vector<Outcome> run_all(const std::vector<Task>& tasks, const Environment& env,
                             bool keep_rounds) {
  std::vector<Outcome> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        SimOptions opt;
        opt.record_rounds = keep_rounds && tasks[i].policy == Policy::HMRODTA;
        auto r = run_trial(tasks[i].cfg, tasks[i].policy, env, opt);
        if (r.invariants.violations() != 0)
          throw std::logic_error("invariant violated in " + trial_stem(tasks[i]));
        results[i] = {std::move(r.metrics), std::move(r.rounds)};
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
      }
    }
  };
  const unsigned n = std::min<std::size_t>(worker_count(), std::max<std::size_t>(tasks.size(), 1));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace

int cmd_run(const fs::path& manifest, const Overrides& ov, std::ostream& log, std::ostream& err) {
  try {
    RunManifest m = load_manifest(manifest);
    apply(ov, m);
    m.validate();
    const auto env = Environment::make(load_map_file(m.map.string()), m.energy);

    std::vector<Task> tasks;
    for (const auto fleet : m.fleets)
      for (const auto mode : m.deadlines)
        for (const int n : m.n_values)
          for (const auto policy : m.policies)
            for (int t = 0; t < m.trials; ++t)
              tasks.push_back({m.scenario(fleet, mode, n, m.seed + static_cast<std::uint64_t>(t)),
                               policy});
    if (!m.requests.empty()) trial_requests(tasks.front().cfg, env);  // fail before writing

    std::error_code ec;
    fs::create_directories(m.out, ec);
    if (ec || !fs::is_directory(m.out))
      throw std::runtime_error("output directory not writable: " + m.out.string());
    if (m.traces) fs::create_directories(m.out / "traces");
    if (m.auction_trace) fs::create_directories(m.out / "auctions");

    const auto results = run_all(tasks, env, m.auction_trace);

    std::vector<MetricsRow> rows;
    rows.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& t = tasks[i];
      const auto& mt = results[i].metrics;
      rows.push_back({t.cfg.seed, t.policy, t.cfg.fleet, t.cfg.deadline, t.cfg.n_requests,
                      mt.cumulative_penalty, mt.rejected, mt.completed});
      if (m.traces) {
        auto out = open_out(m.out / "traces" / (trial_stem(t) + ".csv"));
        write_request_trace(out, mt);
      }
      if (m.auction_trace && t.policy == Policy::HMRODTA) {
        auto out = open_out(m.out / "auctions" / (trial_stem(t) + ".csv"));
        write_auction_trace(out, results[i].rounds);
      }
    }
    {
      auto out = open_out(m.out / "metrics.csv");
      write_metrics_csv(out, rows);
    }
    {
      auto out = open_out(m.out / "summary.csv");
      write_summary_csv(out, summarize(rows));
    }
    log << "ran " << tasks.size() << " trials; results in " << m.out.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_gen(const fs::path& config, const Overrides& ov, std::ostream& log, std::ostream& err) {
  try {
    RunManifest m = load_manifest(config);
    const bool out_given = ov.out.has_value();
    apply(ov, m);
    m.validate();
    const auto env = Environment::make(load_map_file(m.map.string()), m.energy);
    const auto cfg = m.scenario(m.fleets.front(), m.deadlines.front(), m.n_values.front(), m.seed);
    const auto reqs = generate_requests(cfg, env);

    fs::path target = m.out;
    if (!out_given && target.extension() != ".csv") target /= "requests.csv";
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    auto out = open_out(target);
    write_request_log(out, reqs);
    log << "wrote " << reqs.size() << " requests to " << target.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_report(const fs::path& dir, const Overrides& ov, std::ostream& log, std::ostream& err) {
  try {
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.starts_with("metrics") && name.ends_with(".csv"))
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no metrics CSV in " + dir.string());

    std::vector<MetricsRow> rows;
    for (const auto& f : files) {
      std::ifstream in(f);
      auto part = read_metrics_csv(in);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    if (rows.empty()) throw std::runtime_error("metrics files hold no rows");

    const fs::path out_dir = ov.out.value_or(dir);
    fs::create_directories(out_dir);
    {
      auto out = open_out(out_dir / "summary.csv");
      write_summary_csv(out, summarize(rows));
    }
    {
      auto out = open_out(out_dir / "pctdiff.csv");
      write_pctdiff_csv(out, rows);
    }
    log << "summarized " << rows.size() << " trials into " << out_dir.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace odta
