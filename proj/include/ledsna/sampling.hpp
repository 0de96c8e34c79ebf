#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ledsna/blackbox.hpp"
#include "ledsna/core.hpp"
#include "ledsna/representation.hpp"
#include "ledsna/segmentation.hpp"

namespace ledsna {

/// How connected sampling grows an active set.
enum class GrowthMode {
  kConnected,  // randomized DFS: any connected induced subgraph
  kClique,     // strict: each new vertex must be adjacent to every member
};

struct ConnectedSamplerOptions {
  /// Relative probability of target size s = i + 1. Empty means uniform over
  /// {1..d′}.
  std::vector<double> size_weights;
  GrowthMode mode = GrowthMode::kConnected;
};

/// Masks whose active vertices induce a connected subgraph. Each draws a
/// target size, picks a uniform start vertex and grows by randomized DFS
/// until the size is reached or the start's component is exhausted.
std::vector<BinaryMask> sample_connected(const SegmentGraph& graph, std::size_t n_samples, std::uint64_t seed,
                                         const ConnectedSamplerOptions& options = {});

/// One i.i.d. fair bit per group.
std::vector<BinaryMask> sample_groups(const DependencyGroups& groups, std::size_t n_samples, std::uint64_t seed);

/// Source of token dependency groups.
class DependencyProvider {
 public:
  virtual ~DependencyProvider() = default;
  virtual DependencyGroups groups_for(const Instance& instance) const = 0;
};

/// Consecutive runs of `window` tokens; window 1 gives singleton groups.
class WindowGrouper final : public DependencyProvider {
 public:
  explicit WindowGrouper(std::size_t window = 1);
  DependencyGroups groups_for(const Instance& instance) const override;

 private:
  std::size_t window_;
};

/// Groups supplied up front (e.g. loaded from a dependency file).
class FixedGroups final : public DependencyProvider {
 public:
  explicit FixedGroups(DependencyGroups groups) : groups_(std::move(groups)) {}
  DependencyGroups groups_for(const Instance& instance) const override;

 private:
  DependencyGroups groups_;
};

/// Validated partition of the instance's token indices.
DependencyGroups group_tokens(const Instance& instance, const DependencyProvider& provider);

enum class DistanceMetric { kCosine, kL2 };

/// exp(−D² / σ²) with D the cosine distance or Euclidean distance between
/// the masks. Throws ContractError for an all-zero reference under cosine.
double proximity(const BinaryMask& reference, const BinaryMask& sample, double sigma, DistanceMetric metric);

/// 0.25·√d′ for l2, 25 for cosine.
double default_sigma(DistanceMetric metric, std::size_t d_prime);
/// l2 for images, cosine for text.
DistanceMetric default_metric(Modality modality);

/// Masks z′, black-box labels f(z) and proximity weights π. The last entry
/// is always the all-ones mask of the explained instance.
struct PerturbationSet {
  std::vector<BinaryMask> masks;
  std::vector<double> labels;
  std::vector<double> weights;
  BinaryMask instance_mask;

  std::size_t size() const noexcept { return masks.size(); }
  std::size_t d_prime() const noexcept { return instance_mask.size(); }
  double label_at_instance() const { return labels.back(); }

  /// Throws ContractError when lengths disagree, N == 0, a mask has the wrong
  /// length or a weight is not strictly positive.
  void validate() const;
};

struct SamplingConfig {
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;
  std::optional<DistanceMetric> metric;  // modality default when unset
  std::optional<double> sigma;           // default_sigma when unset
  std::optional<Rgb> hide_color;         // image mean when unset
  ConnectedSamplerOptions connected;
  QueryOptions query;
};

/// Samples masks with the modality's sampler, recovers and scores them, and
/// appends the all-ones mask with f(x). Image spaces sample over `graph`
/// (the segment adjacency graph when null). Black-box errors propagate and
/// no partial set is returned.
PerturbationSet build_perturbation_set(const Instance& instance, const InterpretableSpace& space,
                                       Classifier& blackbox, const SamplingConfig& config,
                                       const SegmentGraph* graph = nullptr);

}  // namespace ledsna
