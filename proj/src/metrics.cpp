#include "ledsna/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ledsna/error.hpp"

namespace ledsna {

double approx_error(double f_x0, double g_x0) {
  if (!std::isfinite(f_x0) || !std::isfinite(g_x0)) throw ContractError("approx_error needs finite inputs");
  return std::abs(f_x0 - g_x0);
}

namespace {

void check(std::span<const double> labels, std::span<const double> predictions) {
  if (labels.size() != predictions.size()) throw ContractError("labels and predictions differ in length");
  if (labels.size() < 2) throw ContractError("R^2 needs at least two samples");
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

FidelityReport r_squared(std::span<const double> labels, std::span<const double> predictions) {
  check(labels, predictions);
  FidelityReport r;
  r.n = labels.size();
  r.f_mean = mean(labels);
  const bool constant = std::all_of(labels.begin(), labels.end(), [&](double f) { return f == labels.front(); });
  for (std::size_t i = 0; i < labels.size(); ++i) {
    r.sse += (labels[i] - predictions[i]) * (labels[i] - predictions[i]);
    r.sst += (labels[i] - r.f_mean) * (labels[i] - r.f_mean);
  }
  // The rounded mean of equal labels can differ from them in the last bit.
  if (constant) r.sst = 0.0;
  if (r.sst > 0.0) {
    r.r_squared = 1.0 - r.sse / r.sst;
  } else if (r.sse <= 1e-20) {
    r.r_squared = 1.0;
  } else {
    r.r_squared = -std::numeric_limits<double>::infinity();
    r.r_squared_defined = false;
  }
  return r;
}

double r_squared_mse_var(std::span<const double> labels, std::span<const double> predictions) {
  check(labels, predictions);
  const double n = static_cast<double>(labels.size());
  const double f_mean = mean(labels);
  double mse = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    mse += (labels[i] - predictions[i]) * (labels[i] - predictions[i]) / n;
    var += (labels[i] - f_mean) * (labels[i] - f_mean) / n;
  }
  if (var == 0.0) throw ContractError("MSE/Var form is undefined for constant labels");
  return 1.0 - mse / var;
}

}  // namespace ledsna
