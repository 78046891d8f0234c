#include "odta/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace odta {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

using CellKey = std::tuple<std::string, std::string, std::string, int>;

CellKey key_of(const MetricsRow& r) {
  return {std::string(to_string(r.policy)), std::string(to_string(r.fleet)),
          std::string(to_string(r.deadline)), r.n_requests};
}

bool row_less(const MetricsRow& a, const MetricsRow& b) {
  const auto ka = key_of(a), kb = key_of(b);
  if (ka != kb) return ka < kb;
  return a.seed < b.seed;
}

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (const double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows)
    out << r.seed << ',' << to_string(r.policy) << ',' << to_string(r.fleet) << ','
        << to_string(r.deadline) << ',' << r.n_requests << ',' << num(r.cum_penalty) << ','
        << r.rejected << ',' << r.completed << '\n';
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty metrics file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw std::runtime_error("not a metrics file");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error("malformed metrics row: " + line);
    try {
      MetricsRow r;
      r.seed = std::stoull(f[0]);
      r.policy = parse_policy(f[1]);
      r.fleet = parse_fleet(f[2]);
      r.deadline = parse_deadline_mode(f[3]);
      r.n_requests = std::stoi(f[4]);
      r.cum_penalty = std::stod(f[5]);
      r.rejected = std::stoi(f[6]);
      r.completed = std::stoi(f[7]);
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed metrics row: " + line);
    }
  }
  return rows;
}

std::vector<SummaryRow> summarize(std::span<const MetricsRow> input) {
  std::vector<MetricsRow> rows(input.begin(), input.end());
  std::stable_sort(rows.begin(), rows.end(), row_less);
  std::vector<SummaryRow> out;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    std::vector<double> rej, pen;
    while (j < rows.size() && key_of(rows[j]) == key_of(rows[i])) {
      rej.push_back(rows[j].rejected);
      pen.push_back(rows[j].cum_penalty);
      ++j;
    }
    SummaryRow s;
    s.policy = rows[i].policy;
    s.fleet = rows[i].fleet;
    s.deadline = rows[i].deadline;
    s.n_requests = rows[i].n_requests;
    s.trials = static_cast<int>(j - i);
    const auto r = stats(rej), p = stats(pen);
    s.mean_rejected = r.mean;
    s.sd_rejected = r.sd;
    s.mean_penalty = p.mean;
    s.sd_penalty = p.sd;
    out.push_back(s);
    i = j;
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "policy,fleet,deadline_mode,n_requests,trials,mean_rejected,sd_rejected,"
         "mean_penalty_s,sd_penalty_s\n";
  for (const auto& s : rows)
    out << to_string(s.policy) << ',' << to_string(s.fleet) << ',' << to_string(s.deadline)
        << ',' << s.n_requests << ',' << s.trials << ',' << num(s.mean_rejected) << ','
        << num(s.sd_rejected) << ',' << num(s.mean_penalty) << ',' << num(s.sd_penalty) << '\n';
}

double percentage_difference(double a, double b) {
  if (a == 0.0 && b == 0.0) return 0.0;
  return std::abs(a - b) / ((a + b) / 2.0) * 100.0;
}

void write_pctdiff_csv(std::ostream& out, std::span<const MetricsRow> input) {
  struct Band {
    int lo, hi;
  };
  static constexpr Band kBands[] = {{40, 160}, {160, 280}};

  std::vector<MetricsRow> rows(input.begin(), input.end());
  std::stable_sort(rows.begin(), rows.end(), row_less);

  // (fleet, mode) -> policy -> band -> samples
  using Samples = std::vector<const MetricsRow*>;
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::array<Samples, 2>>>
      cells;
  for (const auto& r : rows) {
    auto& per = cells[{std::string(to_string(r.fleet)), std::string(to_string(r.deadline))}]
                     [std::string(to_string(r.policy))];
    for (std::size_t b = 0; b < 2; ++b)
      if (r.n_requests >= kBands[b].lo && r.n_requests <= kBands[b].hi) per[b].push_back(&r);
  }

  out << "# pct_diff = |a - b| / ((a + b) / 2) * 100 on band means; 0 when both means are 0; "
         "bands 40-160 and 160-280 share n=160\n";
  out << "fleet,deadline_mode,metric,policy_a,policy_b,pct_40_160,pct_160_280\n";
  for (const auto& [fm, policies] : cells) {
    for (auto a = policies.begin(); a != policies.end(); ++a) {
      for (auto b = std::next(a); b != policies.end(); ++b) {
        for (const char* metric : {"rejected", "penalty"}) {
          out << fm.first << ',' << fm.second << ',' << metric << ',' << a->first << ','
              << b->first;
          for (std::size_t band = 0; band < 2; ++band) {
            const auto& sa = a->second[band];
            const auto& sb = b->second[band];
            out << ',';
            if (sa.empty() || sb.empty()) continue;
            auto mean = [&](const Samples& s) {
              std::vector<double> xs;
              for (const auto* r : s)
                xs.push_back(metric[0] == 'r' ? r->rejected : r->cum_penalty);
              return stats(xs).mean;
            };
            out << fixed(percentage_difference(mean(sa), mean(sb)));
          }
          out << '\n';
        }
      }
    }
  }
}

}  // namespace odta
