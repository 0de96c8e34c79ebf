#include "ledsna/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "ledsna/error.hpp"

namespace ledsna {

namespace {

BinaryMask grow_connected(const SegmentGraph& graph, std::size_t target, std::size_t start, std::mt19937_64& rng) {
  BinaryMask mask(graph.n_vertices());
  std::size_t size = 0;
  std::vector<std::size_t> stack{start};
  std::vector<std::size_t> order;
  while (!stack.empty() && size < target) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (mask[v]) continue;
    mask.set(v, true);
    ++size;
    order.clear();
    for (const auto u : graph.neighbors(v)) {
      if (!mask[u]) order.push_back(u);
    }
    std::shuffle(order.begin(), order.end(), rng);
    stack.insert(stack.end(), order.begin(), order.end());
  }
  return mask;
}

BinaryMask grow_clique(const SegmentGraph& graph, std::size_t target, std::size_t start, std::mt19937_64& rng) {
  BinaryMask mask(graph.n_vertices());
  mask.set(start, true);
  std::vector<std::size_t> candidates = graph.neighbors(start);
  std::size_t size = 1;
  while (size < target && !candidates.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::size_t v = candidates[pick(rng)];
    mask.set(v, true);
    ++size;
    std::vector<std::size_t> next;
    for (const auto c : candidates) {
      if (c != v && graph.has_edge(c, v)) next.push_back(c);
    }
    candidates = std::move(next);
  }
  return mask;
}

}  // namespace

std::vector<BinaryMask> sample_connected(const SegmentGraph& graph, std::size_t n_samples, std::uint64_t seed,
                                         const ConnectedSamplerOptions& options) {
  const std::size_t d = graph.n_vertices();
  if (d == 0) throw ContractError("cannot sample from an empty graph");
  if (n_samples == 0) throw ContractError("n_samples must be at least 1");
  std::vector<double> weights = options.size_weights;
  if (weights.empty()) weights.assign(d, 1.0);
  if (weights.size() != d) {
    throw ContractError("size distribution has " + std::to_string(weights.size()) + " entries for " +
                        std::to_string(d) + " vertices");
  }
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("size weights must be finite and non-negative");
    total += w;
  }
  if (total <= 0.0) throw ContractError("size distribution has no mass");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> size_dist(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> start_dist(0, d - 1);
  std::vector<BinaryMask> out;
  out.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const std::size_t target = size_dist(rng) + 1;
    const std::size_t start = start_dist(rng);
    out.push_back(options.mode == GrowthMode::kConnected ? grow_connected(graph, target, start, rng)
                                                         : grow_clique(graph, target, start, rng));
  }
  return out;
}

std::vector<BinaryMask> sample_groups(const DependencyGroups& groups, std::size_t n_samples, std::uint64_t seed) {
  if (groups.size() == 0) throw ContractError("need at least one group to sample");
  if (n_samples == 0) throw ContractError("n_samples must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<BinaryMask> out;
  out.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    BinaryMask m(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) m.set(g, (rng() >> 63) != 0);
    out.push_back(std::move(m));
  }
  return out;
}

WindowGrouper::WindowGrouper(std::size_t window) : window_(window) {
  if (window == 0) throw ContractError("window must be at least 1");
}

DependencyGroups WindowGrouper::groups_for(const Instance& instance) const {
  const std::size_t n = instance.tokens().size();
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t start = 0; start < n; start += window_) {
    std::vector<std::size_t> g;
    for (std::size_t t = start; t < std::min(n, start + window_); ++t) g.push_back(t);
    groups.push_back(std::move(g));
  }
  return DependencyGroups(std::move(groups), n);
}

DependencyGroups FixedGroups::groups_for(const Instance& instance) const {
  if (groups_.n_tokens() != instance.tokens().size()) {
    throw ContractError("dependency groups cover " + std::to_string(groups_.n_tokens()) + " tokens but the text has " +
                        std::to_string(instance.tokens().size()));
  }
  return groups_;
}

DependencyGroups group_tokens(const Instance& instance, const DependencyProvider& provider) {
  if (instance.tokens().empty()) throw ContractError("cannot group an empty token sequence");
  auto groups = provider.groups_for(instance);
  // Re-validate: providers may be user code.
  return DependencyGroups(groups.groups(), instance.tokens().size());
}

double proximity(const BinaryMask& reference, const BinaryMask& sample, double sigma, DistanceMetric metric) {
  if (reference.size() != sample.size()) throw ContractError("proximity: masks differ in length");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractError("proximity: sigma must be positive");
  double d2 = 0.0;
  if (metric == DistanceMetric::kL2) {
    for (std::size_t i = 0; i < reference.size(); ++i) d2 += reference[i] != sample[i] ? 1.0 : 0.0;
  } else {
    const double na = static_cast<double>(reference.count());
    const double nb = static_cast<double>(sample.count());
    if (na == 0.0) throw ContractError("proximity: cosine distance needs a non-zero reference mask");
    double dot = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) dot += (reference[i] && sample[i]) ? 1.0 : 0.0;
    // A zero sample is orthogonal to everything.
    const double cosine = nb == 0.0 ? 0.0 : dot / std::sqrt(na * nb);
    const double d = std::max(0.0, 1.0 - cosine);
    d2 = d * d;
  }
  // Range is (0, 1]: keep far samples strictly positive instead of underflowing.
  return std::max(std::exp(-d2 / (sigma * sigma)), std::numeric_limits<double>::min());
}

double default_sigma(DistanceMetric metric, std::size_t d_prime) {
  return metric == DistanceMetric::kL2 ? 0.25 * std::sqrt(static_cast<double>(d_prime)) : 25.0;
}

DistanceMetric default_metric(Modality modality) {
  return modality == Modality::kImage ? DistanceMetric::kL2 : DistanceMetric::kCosine;
}

void PerturbationSet::validate() const {
  if (masks.empty()) throw ContractError("perturbation set is empty");
  if (labels.size() != masks.size() || weights.size() != masks.size()) {
    throw ContractError("perturbation set has mismatched masks/labels/weights");
  }
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].size() != instance_mask.size()) {
      throw ContractError("perturbation mask " + std::to_string(i) + " has the wrong length");
    }
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw ContractError("perturbation weight " + std::to_string(i) + " is not strictly positive");
    }
    if (!std::isfinite(labels[i])) throw ContractError("perturbation label " + std::to_string(i) + " is not finite");
  }
}

PerturbationSet build_perturbation_set(const Instance& instance, const InterpretableSpace& space,
                                       Classifier& blackbox, const SamplingConfig& config,
                                       const SegmentGraph* graph) {
  const std::size_t d = space.d_prime();
  if (d == 0) throw ContractError("interpretable space has no features");
  PerturbationSet set;
  if (space.kind() == Modality::kImage) {
    if (graph) {
      if (graph->n_vertices() != d) throw ContractError("sampling graph does not have d' vertices");
      set.masks = sample_connected(*graph, config.n_samples, config.seed, config.connected);
    } else {
      set.masks = sample_connected(build_adjacency(space.segment_map()), config.n_samples, config.seed,
                                   config.connected);
    }
  } else {
    set.masks = sample_groups(space.groups(), config.n_samples, config.seed);
  }
  set.instance_mask = BinaryMask::ones(d);
  set.masks.push_back(set.instance_mask);

  std::vector<Instance> recovered;
  recovered.reserve(set.masks.size());
  for (const auto& m : set.masks) recovered.push_back(recover(m, space, instance, config.hide_color));
  spdlog::debug("querying {} for {} perturbations", blackbox.describe(), recovered.size());
  set.labels = query_batched(blackbox, recovered, config.query);

  const DistanceMetric metric = config.metric.value_or(default_metric(space.kind()));
  const double sigma = config.sigma.value_or(default_sigma(metric, d));
  set.weights.reserve(set.masks.size());
  for (const auto& m : set.masks) set.weights.push_back(proximity(set.instance_mask, m, sigma, metric));
  set.validate();
  return set;
}

}  // namespace ledsna
