#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ledsna/blackbox.hpp"
#include "ledsna/core.hpp"
#include "ledsna/explain.hpp"

namespace ledsna {

struct CorpusEntry {
  Instance instance;
  InterpretableSpace space;
};

/// Builds the black box for one corpus entry; `instance_seed` is seed + index.
using ClassifierFactory = std::function<std::unique_ptr<Classifier>(const CorpusEntry&, std::uint64_t instance_seed)>;

struct MethodScore {
  double g_at_x = 0.0;
  double err = 0.0;
  double r_squared = 0.0;
};

struct InstanceComparison {
  std::string instance_id;
  double f_at_x = 0.0;
  MethodScore first;
  MethodScore second;
};

/// Per-instance scores of two surrogate configurations plus win counts of the
/// first over the second (strictly lower Err, strictly higher R²).
struct ComparisonReport {
  std::string first_label;
  std::string second_label;
  std::vector<InstanceComparison> instances;
  std::size_t err_wins = 0;
  std::size_t err_ties = 0;
  std::size_t r2_wins = 0;
  std::size_t r2_ties = 0;

  /// Fraction of strict wins.
  double err_win_fraction() const;
  double r2_win_fraction() const;
  /// Wins plus half the ties, over all instances.
  double err_win_rate() const;
  double r2_win_rate() const;
};

/// For each entry and trial, draws one perturbation set (sampling seed derived
/// from seed + index and the trial number) and fits both configurations to
/// it. Scores are averaged over trials. An undefined R² counts as −∞.
ComparisonReport compare_surrogates(const std::vector<CorpusEntry>& corpus, const ClassifierFactory& make_blackbox,
                                    const ExplainConfig& first, const ExplainConfig& second, std::size_t trials,
                                    std::uint64_t seed);

/// instance_id,method,f_x,g_x,err,r_squared rows, two per instance.
std::string comparison_csv(const ComparisonReport& report);
/// Human-readable table followed by the aggregate win rates.
std::string comparison_table(const ComparisonReport& report);

}  // namespace ledsna
