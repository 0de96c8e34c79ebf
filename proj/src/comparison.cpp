#include "ledsna/comparison.hpp"

#include <cstdio>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ledsna/error.hpp"

namespace ledsna {

namespace {

double fraction(std::size_t count, std::size_t n) { return n == 0 ? 0.0 : static_cast<double>(count) / n; }

std::uint64_t trial_seed(std::uint64_t instance_seed, std::size_t trial) {
  return instance_seed ^ (static_cast<std::uint64_t>(trial) * 0x9E3779B97F4A7C15ULL);
}

std::string method_label(const ExplainConfig& config) { return to_string(config.surrogate); }

}  // namespace

double ComparisonReport::err_win_fraction() const { return fraction(err_wins, instances.size()); }
double ComparisonReport::r2_win_fraction() const { return fraction(r2_wins, instances.size()); }
double ComparisonReport::err_win_rate() const {
  return instances.empty() ? 0.0 : (err_wins + 0.5 * err_ties) / static_cast<double>(instances.size());
}
double ComparisonReport::r2_win_rate() const {
  return instances.empty() ? 0.0 : (r2_wins + 0.5 * r2_ties) / static_cast<double>(instances.size());
}

ComparisonReport compare_surrogates(const std::vector<CorpusEntry>& corpus, const ClassifierFactory& make_blackbox,
                                    const ExplainConfig& first, const ExplainConfig& second, std::size_t trials,
                                    std::uint64_t seed) {
  if (trials == 0) throw ContractError("trials must be at least 1");
  ComparisonReport report;
  report.first_label = method_label(first);
  report.second_label = method_label(second);
  if (report.first_label == report.second_label) {
    report.first_label += "#1";
    report.second_label += "#2";
  }

  for (std::size_t index = 0; index < corpus.size(); ++index) {
    const CorpusEntry& entry = corpus[index];
    const std::uint64_t instance_seed = seed + index;
    auto blackbox = make_blackbox(entry, instance_seed);
    InstanceComparison row;
    row.instance_id = entry.instance.id();
    for (std::size_t t = 0; t < trials; ++t) {
      SamplingConfig sampling = first.sampling;
      sampling.seed = trial_seed(instance_seed, t);
      const PerturbationSet data = build_perturbation_set(entry.instance, entry.space, *blackbox, sampling);
      const Explanation a = explain_perturbations(data, first);
      const Explanation b = explain_perturbations(data, second);
      row.f_at_x += data.label_at_instance() / static_cast<double>(trials);
      row.first.g_at_x += a.g_at_x / static_cast<double>(trials);
      row.first.err += a.err() / static_cast<double>(trials);
      row.first.r_squared += a.r_squared() / static_cast<double>(trials);
      row.second.g_at_x += b.g_at_x / static_cast<double>(trials);
      row.second.err += b.err() / static_cast<double>(trials);
      row.second.r_squared += b.r_squared() / static_cast<double>(trials);
    }
    if (row.first.err < row.second.err) ++report.err_wins;
    else if (row.first.err == row.second.err) ++report.err_ties;
    if (row.first.r_squared > row.second.r_squared) ++report.r2_wins;
    else if (row.first.r_squared == row.second.r_squared) ++report.r2_ties;
    spdlog::debug("{}: err {:.5f} vs {:.5f}, R2 {:.4f} vs {:.4f}", row.instance_id, row.first.err, row.second.err,
                 row.first.r_squared, row.second.r_squared);
    report.instances.push_back(std::move(row));
  }
  return report;
}

std::string comparison_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "instance_id,method,f_x,g_x,err,r_squared\n";
  for (const auto& row : report.instances) {
    out << row.instance_id << ',' << report.first_label << ',' << row.f_at_x << ',' << row.first.g_at_x << ','
        << row.first.err << ',' << row.first.r_squared << '\n';
    out << row.instance_id << ',' << report.second_label << ',' << row.f_at_x << ',' << row.second.g_at_x << ','
        << row.second.err << ',' << row.second.r_squared << '\n';
  }
  return out.str();
}

std::string comparison_table(const ComparisonReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %-8s %10s %10s %10s %10s\n", "instance", "method", "f(x)", "g(x)", "Err", "R^2");
  out << line;
  for (const auto& row : report.instances) {
    for (const auto* score : {&row.first, &row.second}) {
      const auto& label = score == &row.first ? report.first_label : report.second_label;
      std::snprintf(line, sizeof line, "%-24.24s %-8.8s %10.4f %10.4f %10.4f %10.4f\n", row.instance_id.c_str(),
                    label.c_str(), row.f_at_x, score->g_at_x, score->err, score->r_squared);
      out << line;
    }
  }
  const std::size_t n = report.instances.size();
  std::snprintf(line, sizeof line, "%s lower Err than %s: %zu/%zu (ties %zu, win rate %.4f)\n",
                report.first_label.c_str(), report.second_label.c_str(), report.err_wins, n, report.err_ties,
                report.err_win_rate());
  out << line;
  std::snprintf(line, sizeof line, "%s higher R^2 than %s: %zu/%zu (ties %zu, win rate %.4f)\n",
                report.first_label.c_str(), report.second_label.c_str(), report.r2_wins, n, report.r2_ties,
                report.r2_win_rate());
  out << line;
  return out.str();
}

}  // namespace ledsna
