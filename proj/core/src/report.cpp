#include "cascadelab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cascadelab/errors.hpp"

namespace cascadelab {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string join_queries(const std::vector<double>& queries) {
  std::string out;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (i > 0) out += ';';
    out += format_double(queries[i]);
  }
  return out;
}

std::vector<double> parse_queries(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) {
    if (!part.empty()) out.push_back(std::stod(part));
  }
  return out;
}

constexpr const char* kResultsHeader =
    "method,budget,alpha,beta,seed,accuracy,spend,unanswered,questions,per_arm_queries";

}  // namespace

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  out << kResultsHeader << '\n';
  for (const ResultRow& r : rows) {
    out << r.method << ',' << format_double(r.budget) << ','
        << format_double(r.alpha) << ',' << format_double(r.beta) << ','
        << r.seed << ',' << format_double(r.accuracy) << ','
        << format_double(r.spend) << ',' << r.unanswered << ',' << r.questions
        << ',' << join_queries(r.per_arm_queries) << '\n';
  }
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open results file '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw DataError("results file '" + path.string() +
                    "' does not match the expected schema");
  }
  std::vector<ResultRow> rows;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 10) {
      throw DataError("line " + std::to_string(line_number) +
                      ": expected 10 fields, got " + std::to_string(f.size()));
    }
    try {
      ResultRow r;
      r.method = f[0];
      r.budget = std::stod(f[1]);
      r.alpha = std::stod(f[2]);
      r.beta = std::stod(f[3]);
      r.seed = static_cast<std::uint64_t>(std::stoull(f[4]));
      r.accuracy = std::stod(f[5]);
      r.spend = std::stod(f[6]);
      r.unanswered = std::stoi(f[7]);
      r.questions = std::stoi(f[8]);
      r.per_arm_queries = parse_queries(f[9]);
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<SeriesRow> accuracy_series(const std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, double>, SeriesRow> grouped;
  for (const ResultRow& r : rows) {
    SeriesRow& s = grouped[{r.method, r.budget}];
    s.method = r.method;
    s.budget = r.budget;
    s.mean_accuracy += r.accuracy;
    s.mean_spend += r.spend;
    ++s.runs;
  }
  std::vector<SeriesRow> series;
  series.reserve(grouped.size());
  for (auto& [key, s] : grouped) {
    s.mean_accuracy /= s.runs;
    s.mean_spend /= s.runs;
    series.push_back(std::move(s));
  }
  return series;
}

void write_series_csv(const std::vector<SeriesRow>& series,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  out << "method,budget,mean_accuracy,mean_spend,runs\n";
  for (const SeriesRow& s : series) {
    out << s.method << ',' << format_double(s.budget) << ','
        << format_double(s.mean_accuracy) << ',' << format_double(s.mean_spend)
        << ',' << s.runs << '\n';
  }
}

std::vector<HistogramRow> query_histogram(const std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, double>, std::pair<std::vector<double>, int>>
      grouped;
  for (const ResultRow& r : rows) {
    auto& [sums, count] = grouped[{r.method, r.budget}];
    if (sums.size() < r.per_arm_queries.size()) {
      sums.resize(r.per_arm_queries.size(), 0.0);
    }
    for (std::size_t k = 0; k < r.per_arm_queries.size(); ++k) {
      sums[k] += r.per_arm_queries[k];
    }
    ++count;
  }
  std::vector<HistogramRow> out;
  for (const auto& [key, value] : grouped) {
    const auto& [sums, count] = value;
    for (std::size_t k = 0; k < sums.size(); ++k) {
      HistogramRow h;
      h.method = key.first;
      h.budget = key.second;
      h.arm_id = static_cast<int>(k);
      h.avg_queries = sums[k] / count;
      out.push_back(std::move(h));
    }
  }
  return out;
}

void write_histogram_csv(const std::vector<HistogramRow>& rows,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  out << "method,budget,arm_id,avg_queries_per_question\n";
  for (const HistogramRow& h : rows) {
    out << h.method << ',' << format_double(h.budget) << ',' << h.arm_id << ','
        << format_double(h.avg_queries) << '\n';
  }
}

std::vector<ParetoRow> pareto_points(const std::vector<SeriesRow>& series) {
  std::vector<ParetoRow> points;
  points.reserve(series.size());
  for (const SeriesRow& s : series) {
    points.push_back(ParetoRow{s.method, s.budget, s.mean_accuracy, false});
  }
  for (ParetoRow& p : points) {
    for (const ParetoRow& other : points) {
      const bool better_or_equal =
          other.budget <= p.budget && other.accuracy >= p.accuracy;
      const bool strictly_better =
          other.budget < p.budget || other.accuracy > p.accuracy;
      if (better_or_equal && strictly_better) {
        p.dominated = true;
        break;
      }
    }
  }
  return points;
}

void write_pareto_csv(const std::vector<ParetoRow>& rows,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  out << "method,budget,accuracy,dominated\n";
  for (const ParetoRow& p : rows) {
    out << p.method << ',' << format_double(p.budget) << ','
        << format_double(p.accuracy) << ',' << (p.dominated ? 1 : 0) << '\n';
  }
}

}  // namespace cascadelab
