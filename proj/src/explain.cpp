#include "ledsna/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "ledsna/error.hpp"

namespace ledsna {

const char* to_string(SurrogateKind kind) { return kind == SurrogateKind::kSvr ? "svr" : "ridge"; }
const char* to_string(KernelKind kind) { return kind == KernelKind::kGaussian ? "gaussian" : "linear"; }
const char* to_string(DistanceMetric metric) { return metric == DistanceMetric::kL2 ? "l2" : "cosine"; }

KernelSpec ExplainConfig::kernel_spec(std::size_t d_prime) const {
  if (kernel == KernelKind::kLinear) return KernelSpec::linear();
  return KernelSpec::gaussian(gamma.value_or(1.0 / static_cast<double>(std::max<std::size_t>(1, d_prime))));
}

std::vector<std::size_t> top_k_features(const std::vector<double>& attributions, std::size_t k) {
  std::vector<std::size_t> order(attributions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return attributions[a] > attributions[b]; });
  order.resize(std::min(k, order.size()));
  return order;
}

Explanation explain_perturbations(const PerturbationSet& data, const ExplainConfig& config) {
  data.validate();
  Explanation out;
  out.surrogate = config.surrogate;
  out.n_samples = data.size();
  out.f_at_x = data.label_at_instance();

  std::vector<double> predictions(data.size());
  if (config.surrogate == SurrogateKind::kSvr) {
    const SvrModel model = fit_svr(data, config.kernel_spec(data.d_prime()), config.c, config.epsilon, config.solver);
    for (std::size_t i = 0; i < data.size(); ++i) predictions[i] = model.predict(data.masks[i]);
    out.attributions = attribute(model, data.instance_mask);
    out.g_at_x = model.predict(data.instance_mask);
  } else {
    const LinearModel model = fit_ridge(data, config.lambda);
    for (std::size_t i = 0; i < data.size(); ++i) predictions[i] = model.predict(data.masks[i]);
    out.attributions = attribute(model, data.instance_mask);
    out.g_at_x = model.predict(data.instance_mask);
  }
  out.top_k = top_k_features(out.attributions, config.k);
  out.fidelity = r_squared(data.labels, predictions);
  out.fidelity.err = approx_error(out.f_at_x, out.g_at_x);
  spdlog::debug("{} surrogate: g(x)={:.6f} f(x)={:.6f} err={:.6f} R2={:.6f}", to_string(config.surrogate), out.g_at_x,
                out.f_at_x, out.fidelity.err, out.fidelity.r_squared);
  return out;
}

Explanation explain(const Instance& instance, const InterpretableSpace& space, Classifier& blackbox,
                    const ExplainConfig& config) {
  if (config.k == 0) throw ContractError("k must be at least 1");
  const PerturbationSet data = build_perturbation_set(instance, space, blackbox, config.sampling);
  return explain_perturbations(data, config);
}

nlohmann::json explanation_json(const Explanation& explanation, const Instance& instance,
                                const InterpretableSpace& space, const ExplainConfig& config) {
  using nlohmann::json;
  const std::size_t d = space.d_prime();
  json attributions = json::array();
  for (std::size_t j = 0; j < explanation.attributions.size(); ++j) {
    json a = {{"feature", j}, {"weight", explanation.attributions[j]}};
    if (space.kind() == Modality::kText) {
      const auto& group = space.groups()[j];
      json tokens = json::array();
      for (const auto t : group) tokens.push_back(instance.tokens()[t]);
      a["token_indices"] = group;
      a["tokens"] = std::move(tokens);
    } else {
      a["pixels"] = space.segment_map().sizes()[j];
    }
    attributions.push_back(std::move(a));
  }

  const DistanceMetric metric = config.sampling.metric.value_or(default_metric(space.kind()));
  const KernelSpec kernel = config.kernel_spec(d);
  json cfg = {
      {"surrogate", to_string(config.surrogate)},
      {"kernel", to_string(kernel.kind)},
      {"gamma", kernel.kind == KernelKind::kGaussian ? json(kernel.gamma) : json(nullptr)},
      {"c", config.c},
      {"epsilon", config.epsilon},
      {"lambda", config.lambda},
      {"k", config.k},
      {"n_samples", config.sampling.n_samples},
      {"metric", to_string(metric)},
      {"sigma", config.sampling.sigma.value_or(default_sigma(metric, d))},
      {"d_prime", d},
      {"modality", space.kind() == Modality::kImage ? "image" : "text"},
  };

  json out;
  out["instance_id"] = instance.id();
  out["surrogate"] = to_string(explanation.surrogate);
  out["attributions"] = std::move(attributions);
  out["top_k"] = explanation.top_k;
  out["g_at_x"] = explanation.g_at_x;
  out["f_at_x"] = explanation.f_at_x;
  out["err"] = explanation.fidelity.err;
  out["r_squared"] = explanation.fidelity.r_squared_defined ? json(explanation.fidelity.r_squared) : json(nullptr);
  out["n_samples"] = explanation.n_samples;
  out["seed"] = config.sampling.seed;
  out["config"] = std::move(cfg);
  return out;
}

RgbImage render_overlay(const RgbImage& image, const SegmentMap& segments, const std::vector<std::size_t>& selected) {
  if (image.width() != segments.width() || image.height() != segments.height()) {
    throw ContractError("overlay: image and segment map dimensions differ");
  }
  std::vector<std::uint8_t> keep(segments.n_segments(), 0);
  for (const auto s : selected) {
    if (s >= keep.size()) throw ContractError("overlay: segment index out of range");
    keep[s] = 1;
  }
  auto dim = [](std::uint8_t v) { return static_cast<std::uint8_t>(std::lround(v * 0.3)); };
  RgbImage out = image;
  for (std::size_t p = 0; p < segments.pixel_count(); ++p) {
    if (keep[static_cast<std::size_t>(segments.label(p))]) continue;
    const Rgb c = image.pixel(p);
    out.set_pixel(p, {dim(c.r), dim(c.g), dim(c.b)});
  }
  return out;
}

}  // namespace ledsna
