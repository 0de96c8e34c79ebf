// Small random regression problems over binary masks.
#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ledsna/sampling.hpp"
#include "ledsna/surrogate.hpp"

namespace testing_support {

inline ledsna::PerturbationSet make_set(std::vector<ledsna::BinaryMask> masks, std::vector<double> labels,
                                        std::vector<double> weights = {}) {
  ledsna::PerturbationSet s;
  s.instance_mask = ledsna::BinaryMask::ones(masks.front().size());
  if (weights.empty()) weights.assign(masks.size(), 1.0);
  s.masks = std::move(masks);
  s.labels = std::move(labels);
  s.weights = std::move(weights);
  return s;
}

inline ledsna::BinaryMask random_mask(std::size_t d, std::mt19937_64& rng) {
  ledsna::BinaryMask m(d);
  for (std::size_t j = 0; j < d; ++j) m.set(j, (rng() >> 63) != 0);
  return m;
}

// N samples in d′ dimensions with uniform labels in [0,1] and weights in (0.05, 1].
inline ledsna::PerturbationSet random_problem(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ledsna::BinaryMask> masks;
  std::vector<double> labels, weights;
  for (std::size_t i = 0; i < n; ++i) {
    masks.push_back(random_mask(d, rng));
    labels.push_back(unit(rng));
    weights.push_back(0.05 + 0.95 * unit(rng));
  }
  return make_set(std::move(masks), std::move(labels), std::move(weights));
}

inline Eigen::MatrixXd gram(const ledsna::PerturbationSet& s, const ledsna::KernelSpec& k) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // Written out here rather than through kernel_eval, which is under test.
      double dist = 0.0, dot = 0.0;
      for (std::size_t t = 0; t < s.d_prime(); ++t) {
        dist += s.masks[i][t] != s.masks[j][t] ? 1.0 : 0.0;
        dot += (s.masks[i][t] && s.masks[j][t]) ? 1.0 : 0.0;
      }
      g(i, j) = k.kind == ledsna::KernelKind::kLinear ? dot : std::exp(-k.gamma * dist);
    }
  }
  return g;
}

inline Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace testing_support
