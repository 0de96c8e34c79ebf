#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ledsna/core.hpp"
#include "ledsna/error.hpp"
#include "ledsna/sampling.hpp"

namespace ledsna {

enum class KernelKind { kGaussian, kLinear };

struct KernelSpec {
  KernelKind kind = KernelKind::kGaussian;
  double gamma = 1.0;  // gaussian only

  static KernelSpec gaussian(double gamma) { return {KernelKind::kGaussian, gamma}; }
  static KernelSpec linear() { return {KernelKind::kLinear, 0.0}; }

  /// Throws ContractError for a gaussian kernel with non-positive or
  /// non-finite gamma.
  void validate() const;
  bool operator==(const KernelSpec&) const = default;
};

/// gaussian: exp(−γ‖u−v‖²), linear: u·v.
double kernel_eval(const KernelSpec& spec, const BinaryMask& u, const BinaryMask& v);

struct SvrSolverOptions {
  double tol = 1e-3;  // stop when the maximal KKT violation drops below this
  /// Iteration cap in units of N pair updates (N = training samples).
  std::size_t max_passes = 10'000;
  /// Scale the box of sample i by its proximity weight (C_i = C·π_i).
  bool weighted_box = true;
};

/// Kernel expansion g(z) = Σ_i coeff_i·k(z_i, z) + bias over the training masks.
class SvrModel {
 public:
  SvrModel(std::vector<double> dual_coeffs, double bias, std::vector<BinaryMask> support_masks,
           std::vector<double> box, KernelSpec kernel, double epsilon, double c);

  double predict(const BinaryMask& mask) const;

  /// α_i − α̂_i, one per training sample.
  const std::vector<double>& dual_coeffs() const noexcept { return dual_coeffs_; }
  double bias() const noexcept { return bias_; }
  const std::vector<BinaryMask>& support_masks() const noexcept { return support_masks_; }
  /// Per-sample box C_i.
  const std::vector<double>& box() const noexcept { return box_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  double epsilon() const noexcept { return epsilon_; }
  double c() const noexcept { return c_; }
  std::size_t d_prime() const noexcept { return support_masks_.empty() ? 0 : support_masks_.front().size(); }

  std::size_t iterations = 0;
  double max_violation = 0.0;

 private:
  std::vector<double> dual_coeffs_;
  double bias_;
  std::vector<BinaryMask> support_masks_;
  std::vector<double> box_;
  KernelSpec kernel_;
  double epsilon_;
  double c_;
};

/// ε-SVR by sequential minimal optimization over the dual
///   min ½ΣΣ d_i d_j k(z_i, z_j) − Σ f_i d_i + ε Σ|d_i|
///   s.t. Σ d_i = 0, |d_i| ≤ C_i,
/// selecting the maximal KKT-violating pair each step. C corresponds to
/// 1/(2λ) in the penalized primal. Throws SolverError carrying the residual
/// violation when the iteration cap is hit.
SvrModel fit_svr(const PerturbationSet& data, const KernelSpec& kernel, double c, double epsilon,
                 const SvrSolverOptions& options = {});

double svr_predict(const SvrModel& model, const BinaryMask& mask);

/// Value of the dual objective above for `coeffs` on the given training data.
double svr_dual_objective(std::span<const double> coeffs, std::span<const BinaryMask> masks,
                          std::span<const double> labels, const KernelSpec& kernel, double epsilon);

/// Weighted ridge θ·z + b (intercept unpenalized).
struct LinearModel {
  std::vector<double> coeffs;
  double intercept = 0.0;
  double lambda = 0.0;

  double predict(const BinaryMask& mask) const;
};

/// Raised when the ridge normal equations are singular (only possible with λ = 0).
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// argmin Σ π_i (f_i − θ·z_i − b)² + λ‖θ‖², solved in closed form.
LinearModel fit_ridge(const PerturbationSet& data, double lambda);

/// attribution_j = g(reference) − g(reference with bit j cleared). For a
/// linear model this is exactly θ_j.
std::vector<double> attribute(const SvrModel& model, const BinaryMask& reference);
std::vector<double> attribute(const LinearModel& model, const BinaryMask& reference);

}  // namespace ledsna
