#include "finitenet/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "finitenet/baseline.hpp"
#include "finitenet/rng.hpp"

namespace finitenet {

namespace {

double max_adjacent_jump(const Vec& v) {
  const int n = static_cast<int>(v.size());
  double biggest = std::abs(v[0] - v[n - 1]);
  for (int i = 1; i < n; ++i) {
    biggest = std::max(biggest, std::abs(v[i] - v[i - 1]));
  }
  return biggest;
}

double mse_against(const Trajectory& traj, const Trajectory& ref) {
  return trajectory_mse(traj, ref);
}

}  // namespace

ErrorReport evaluate_case(const ProblemSetup& setup,
                          const LearnedScheme& scheme,
                          const ModelParams& params, const CaseData& data,
                          int horizon) {
  ErrorReport report;
  report.ic_seed = data.ic.seed;
  report.ic_total_variation = total_variation(data.ic_coarse);
  report.max_discontinuity = max_adjacent_jump(data.ic_coarse.values);

  const RolloutResult learned =
      rollout(scheme, params, data.ic_coarse, setup.dt, horizon);
  report.finitenet_blowup = learned.blowup_frame.has_value();

  const SolveResult base = baseline_solve(setup.spec, setup.numerics,
                                          data.ic_coarse, setup.dt, horizon);
  report.baseline_blowup = base.blowup_frame.has_value();

  report.e_f = report.finitenet_blowup
                   ? std::numeric_limits<double>::quiet_NaN()
                   : mse_against(learned.traj, data.ref);
  report.e_b = report.baseline_blowup
                   ? std::numeric_limits<double>::quiet_NaN()
                   : mse_against(base.traj, data.ref);
  if (!report.flagged()) {
    report.e_r = report.e_f / report.e_b;
    report.log10_er = std::log10(report.e_r);
  } else {
    report.e_r = std::numeric_limits<double>::quiet_NaN();
    report.log10_er = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

CampaignSummary summarize(const std::vector<ErrorReport>& reports) {
  CampaignSummary s;
  s.n_cases = static_cast<int>(reports.size());
  double sum = 0.0, sum_sq = 0.0;
  double ef_sum = 0.0, ef_sq = 0.0, eb_sum = 0.0, eb_sq = 0.0;
  int n_ok = 0;
  for (const ErrorReport& r : reports) {
    s.wins += r.win() ? 1 : 0;
    if (r.flagged()) {
      ++s.n_flagged;
      continue;
    }
    ++n_ok;
    sum += r.log10_er;
    sum_sq += r.log10_er * r.log10_er;
    ef_sum += r.e_f;
    ef_sq += r.e_f * r.e_f;
    eb_sum += r.e_b;
    eb_sq += r.e_b * r.e_b;
  }
  s.win_fraction =
      s.n_cases > 0 ? static_cast<double>(s.wins) / s.n_cases : 0.0;
  if (n_ok > 0) {
    s.mean_log10_er = sum / n_ok;
    s.ef_mean = ef_sum / n_ok;
    s.eb_mean = eb_sum / n_ok;
    const double var = sum_sq / n_ok - s.mean_log10_er * s.mean_log10_er;
    s.std_log10_er = std::sqrt(std::max(0.0, var));
    s.ef_std =
        std::sqrt(std::max(0.0, ef_sq / n_ok - s.ef_mean * s.ef_mean));
    s.eb_std =
        std::sqrt(std::max(0.0, eb_sq / n_ok - s.eb_mean * s.eb_mean));
  }
  return s;
}

CampaignResult campaign(const ProblemSetup& setup, const LearnedScheme& scheme,
                        const ModelParams& params, int n_cases,
                        std::uint64_t seed, int horizon, int jobs) {
  if (n_cases < 1) throw std::invalid_argument("campaign: n_cases >= 1");
  CampaignResult out;
  out.reports.resize(n_cases);

  auto run_case = [&](int j) {
    const std::uint64_t ic_seed =
        substream(seed, "eval-ic", static_cast<std::uint64_t>(j)).next_u64();
    const CaseData data = make_case(setup, ic_seed, horizon);
    out.reports[j] = evaluate_case(setup, scheme, params, data, horizon);
  };

  if (jobs <= 1 || n_cases == 1) {
    for (int j = 0; j < n_cases; ++j) run_case(j);
  } else {
    // The KS attractor pool must exist before workers race to build it.
    if (setup.spec.kind == PDEKind::KuramotoSivashinsky && setup.ic.ks_use_pool) {
      (void)sample_initial_condition(setup.spec, setup.ic, setup.numerics,
                                     substream(seed, "eval-ic", 0).next_u64(),
                                     setup.fine_grid());
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(jobs, n_cases); ++w) {
      pool.emplace_back([&]() {
        for (int j = next.fetch_add(1); j < n_cases; j = next.fetch_add(1)) {
          run_case(j);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  out.summary = summarize(out.reports);
  return out;
}

CorrelationTable correlate(const std::vector<ErrorReport>& reports,
                           Feature feature) {
  CorrelationTable table;
  for (const ErrorReport& r : reports) {
    if (r.flagged()) continue;
    const double x = feature == Feature::IcTotalVariation
                         ? r.ic_total_variation
                         : r.max_discontinuity;
    table.pairs.emplace_back(x, r.log10_er);
  }
  if (table.pairs.size() < 3) {
    throw std::invalid_argument(
        "correlate: need at least 3 unflagged reports");
  }
  std::sort(table.pairs.begin(), table.pairs.end());

  const double n = static_cast<double>(table.pairs.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (const auto& [x, y] : table.pairs) {
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  if (vx <= 0.0 || vy <= 0.0) {
    table.defined = false;  // constant feature or constant ratios
    table.pearson_r = std::numeric_limits<double>::quiet_NaN();
  } else {
    table.defined = true;
    table.pearson_r = (sxy - sx * sy / n) / std::sqrt(vx * vy);
  }
  return table;
}

std::vector<HistogramBin> histogram(const std::vector<ErrorReport>& reports,
                                    double bin_width) {
  if (!(bin_width > 0.0)) {
    throw std::invalid_argument("histogram: bin_width must be positive");
  }
  std::vector<double> xs;
  for (const ErrorReport& r : reports) {
    if (!r.flagged()) xs.push_back(r.log10_er);
  }
  if (xs.empty()) {
    throw std::invalid_argument("histogram: no unflagged reports");
  }
  const auto bin_of = [&](double x) {
    return static_cast<long>(std::floor(x / bin_width));
  };
  long lo_bin = bin_of(xs[0]), hi_bin = lo_bin;
  for (double x : xs) {
    lo_bin = std::min(lo_bin, bin_of(x));
    hi_bin = std::max(hi_bin, bin_of(x));
  }
  std::vector<HistogramBin> bins;
  for (long b = lo_bin; b <= hi_bin; ++b) {
    bins.push_back({b * bin_width, (b + 1) * bin_width, 0.0});
  }
  const double unit = 1.0 / static_cast<double>(xs.size());
  for (double x : xs) bins[bin_of(x) - lo_bin].mass += unit;
  return bins;
}

namespace {
void put(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}
}  // namespace

void write_reports_csv(std::ostream& os,
                       const std::vector<ErrorReport>& reports) {
  os << "ic_seed,e_f,e_b,e_r,log10_er,ic_total_variation,max_discontinuity,"
        "finitenet_blowup,baseline_blowup\n";
  for (const ErrorReport& r : reports) {
    os << r.ic_seed << ',';
    put(os, r.e_f);
    os << ',';
    put(os, r.e_b);
    os << ',';
    put(os, r.e_r);
    os << ',';
    put(os, r.log10_er);
    os << ',';
    put(os, r.ic_total_variation);
    os << ',';
    put(os, r.max_discontinuity);
    os << ',' << (r.finitenet_blowup ? 1 : 0) << ','
       << (r.baseline_blowup ? 1 : 0) << "\n";
  }
}

void write_histogram_csv(std::ostream& os,
                         const std::vector<HistogramBin>& bins) {
  os << "bin_lo,bin_hi,mass\n";
  for (const HistogramBin& b : bins) {
    put(os, b.lo);
    os << ',';
    put(os, b.hi);
    os << ',';
    put(os, b.mass);
    os << "\n";
  }
}

void write_correlation_csv(std::ostream& os, const CorrelationTable& table) {
  os << "feature,log10_er\n";
  for (const auto& [x, y] : table.pairs) {
    put(os, x);
    os << ',';
    put(os, y);
    os << "\n";
  }
}

void write_summary(std::ostream& os, const CampaignSummary& s, PDEKind kind) {
  os << "cases = " << s.n_cases << "\n";
  os << "flagged = " << s.n_flagged << "\n";
  os << "wins = " << s.wins << "\n";
  os << "win_fraction = ";
  put(os, s.win_fraction);
  os << "\nmean_log10_er = ";
  put(os, s.mean_log10_er);
  os << "\nstd_log10_er = ";
  put(os, s.std_log10_er);
  os << "\nfinitenet_err_mean = ";
  put(os, s.ef_mean);
  os << "\nfinitenet_err_std = ";
  put(os, s.ef_std);
  os << "\nbaseline_err_mean = ";
  put(os, s.eb_mean);
  os << "\nbaseline_err_std = ";
  put(os, s.eb_std);
  os << "\nequation = " << to_string(kind) << "\n";
}

}  // namespace finitenet
