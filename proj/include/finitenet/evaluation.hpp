#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "finitenet/training.hpp"

namespace finitenet {

/// Per-simulation comparison of the learned solver against the baseline,
/// both scored against the identical reference trajectory.
struct ErrorReport {
  std::uint64_t ic_seed = 0;
  double e_f = 0.0;       // learned-solver MSE
  double e_b = 0.0;       // baseline MSE
  double e_r = 0.0;       // e_f / e_b
  double log10_er = 0.0;
  double ic_total_variation = 0.0;
  double max_discontinuity = 0.0;  // largest adjacent jump of the coarse IC
  bool finitenet_blowup = false;
  bool baseline_blowup = false;

  bool flagged() const { return finitenet_blowup || baseline_blowup; }
  /// A finitenet blow-up always counts as a loss, a baseline blow-up
  /// (alone) as a win.
  bool win() const {
    if (finitenet_blowup) return false;
    if (baseline_blowup) return true;
    return e_r < 1.0;
  }
};

ErrorReport evaluate_case(const ProblemSetup& setup,
                          const LearnedScheme& scheme,
                          const ModelParams& params, const CaseData& data,
                          int horizon);

struct CampaignSummary {
  int n_cases = 0;
  int n_flagged = 0;
  int wins = 0;
  double win_fraction = 0.0;
  double mean_log10_er = 0.0;
  double std_log10_er = 0.0;
  // Separate per-method error statistics over unflagged cases.
  double ef_mean = 0.0, ef_std = 0.0;
  double eb_mean = 0.0, eb_std = 0.0;
};

struct CampaignResult {
  std::vector<ErrorReport> reports;
  CampaignSummary summary;
};

/// Evaluate n_cases fresh ICs (seeds derived from `seed` by case index, so
/// growing the campaign never changes earlier cases). Cases run concurrently
/// when jobs > 1; aggregation is in index order.
CampaignResult campaign(const ProblemSetup& setup, const LearnedScheme& scheme,
                        const ModelParams& params, int n_cases,
                        std::uint64_t seed, int horizon, int jobs = 1);

CampaignSummary summarize(const std::vector<ErrorReport>& reports);

enum class Feature { IcTotalVariation, MaxDiscontinuity };

struct CorrelationTable {
  std::vector<std::pair<double, double>> pairs;  // (feature, log10_er), sorted
  double pearson_r = 0.0;
  bool defined = false;  // false for < 3 points or zero feature variance
};

/// Pairs each unflagged report's feature with its log error ratio and
/// computes the sample correlation. Throws if fewer than 3 unflagged
/// reports are available.
CorrelationTable correlate(const std::vector<ErrorReport>& reports,
                           Feature feature);

struct HistogramBin {
  double lo = 0.0, hi = 0.0;
  double mass = 0.0;
};

/// Normalized PMF of log10_er over unflagged reports; bins aligned to
/// multiples of bin_width. Rejects non-positive widths and empty input.
std::vector<HistogramBin> histogram(const std::vector<ErrorReport>& reports,
                                    double bin_width);

void write_reports_csv(std::ostream& os, const std::vector<ErrorReport>& reports);
void write_histogram_csv(std::ostream& os, const std::vector<HistogramBin>& bins);
void write_correlation_csv(std::ostream& os, const CorrelationTable& table);
void write_summary(std::ostream& os, const CampaignSummary& summary,
                   PDEKind kind);

}  // namespace finitenet
