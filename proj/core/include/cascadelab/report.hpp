#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cascadelab {

// One evaluation cell. Wall time goes to the run log, not the CSV, so that
// repeated runs produce byte-identical files.
struct ResultRow {
  std::string method;
  double budget = 0.0;
  double alpha = 0.0;  // 0 when the pricing mode does not use it
  double beta = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double spend = 0.0;
  int unanswered = 0;
  int questions = 0;
  std::vector<double> per_arm_queries;  // average per question
  double wall_ms = 0.0;
};

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::filesystem::path& path);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

// Per-method accuracy-vs-budget series, averaged over seeds.
struct SeriesRow {
  std::string method;
  double budget = 0.0;
  double mean_accuracy = 0.0;
  double mean_spend = 0.0;
  int runs = 0;
};
std::vector<SeriesRow> accuracy_series(const std::vector<ResultRow>& rows);
void write_series_csv(const std::vector<SeriesRow>& series,
                      const std::filesystem::path& path);

// Average per-arm query counts per question for each (method, budget).
struct HistogramRow {
  std::string method;
  double budget = 0.0;
  int arm_id = 0;
  double avg_queries = 0.0;
};
std::vector<HistogramRow> query_histogram(const std::vector<ResultRow>& rows);
void write_histogram_csv(const std::vector<HistogramRow>& rows,
                         const std::filesystem::path& path);

// Flags (budget, accuracy) points dominated by another point with
// budget <= and accuracy >= (strict in at least one).
struct ParetoRow {
  std::string method;
  double budget = 0.0;
  double accuracy = 0.0;
  bool dominated = false;
};
std::vector<ParetoRow> pareto_points(const std::vector<SeriesRow>& series);
void write_pareto_csv(const std::vector<ParetoRow>& rows,
                      const std::filesystem::path& path);

std::string format_double(double value);

}  // namespace cascadelab
