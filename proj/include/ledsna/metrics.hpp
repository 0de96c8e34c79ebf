#pragma once

#include <cstddef>
#include <span>

namespace ledsna {

/// |f(x₀) − g(x₀)|.
double approx_error(double f_x0, double g_x0);

struct FidelityReport {
  double err = 0.0;
  double r_squared = 0.0;
  /// False when the labels are constant but the predictions miss them; then
  /// r_squared holds −∞.
  bool r_squared_defined = true;
  double sse = 0.0;
  double sst = 0.0;
  std::size_t n = 0;
  double f_mean = 0.0;
};

/// R² = 1 − SSE/SST over unweighted samples. With constant labels (SST = 0)
/// R² is 1 when the predictions match (SSE ≤ 1e-20) and undefined otherwise.
/// Throws ContractError for n < 2 or unequal lengths. `err` is left at 0.
FidelityReport r_squared(std::span<const double> labels, std::span<const double> predictions);

/// The same quantity computed as 1 − MSE/Var.
double r_squared_mse_var(std::span<const double> labels, std::span<const double> predictions);

}  // namespace ledsna
