#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ledsna/blackbox.hpp"
#include "ledsna/core.hpp"
#include "ledsna/metrics.hpp"
#include "ledsna/sampling.hpp"
#include "ledsna/surrogate.hpp"

namespace ledsna {

enum class SurrogateKind { kSvr, kRidge };

const char* to_string(SurrogateKind kind);
const char* to_string(KernelKind kind);
const char* to_string(DistanceMetric metric);

struct ExplainConfig {
  SurrogateKind surrogate = SurrogateKind::kSvr;
  KernelKind kernel = KernelKind::kGaussian;
  std::optional<double> gamma;  // 1/d′ when unset
  double c = 1.0;
  double epsilon = 0.01;
  double lambda = 1.0;
  std::size_t k = 4;
  SamplingConfig sampling;
  SvrSolverOptions solver;

  KernelSpec kernel_spec(std::size_t d_prime) const;
};

struct Explanation {
  SurrogateKind surrogate = SurrogateKind::kSvr;
  std::vector<double> attributions;
  /// Indices ordered by descending attribution (ties: lower index first).
  std::vector<std::size_t> top_k;
  double f_at_x = 0.0;
  double g_at_x = 0.0;
  FidelityReport fidelity;  // err and R² over the perturbation set
  std::size_t n_samples = 0;

  double err() const noexcept { return fidelity.err; }
  double r_squared() const noexcept { return fidelity.r_squared; }
};

/// The min(k, d′) features with the largest attribution.
std::vector<std::size_t> top_k_features(const std::vector<double>& attributions, std::size_t k);

/// Fits the configured surrogate to an existing perturbation set and scores it.
Explanation explain_perturbations(const PerturbationSet& data, const ExplainConfig& config);

/// Sample → label → fit → attribute → measure. Errors from any stage
/// propagate; nothing partial is returned.
Explanation explain(const Instance& instance, const InterpretableSpace& space, Classifier& blackbox,
                    const ExplainConfig& config);

/// Stable JSON form with keys instance_id, surrogate, attributions, top_k,
/// g_at_x, f_at_x, err, r_squared, n_samples, seed, config. Text
/// attributions carry the tokens of their group.
nlohmann::json explanation_json(const Explanation& explanation, const Instance& instance,
                                const InterpretableSpace& space, const ExplainConfig& config);

/// Image with every segment outside `selected` dimmed to 30% brightness.
RgbImage render_overlay(const RgbImage& image, const SegmentMap& segments, const std::vector<std::size_t>& selected);

}  // namespace ledsna
