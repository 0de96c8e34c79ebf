#include "ledsna/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

namespace ledsna {

void KernelSpec::validate() const {
  if (kind == KernelKind::kGaussian && (!(gamma > 0.0) || !std::isfinite(gamma))) {
    throw ContractError("gaussian kernel needs a finite gamma > 0");
  }
}

double kernel_eval(const KernelSpec& spec, const BinaryMask& u, const BinaryMask& v) {
  if (u.size() != v.size()) throw ContractError("kernel: masks differ in length");
  if (spec.kind == KernelKind::kLinear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += (u[i] && v[i]) ? 1.0 : 0.0;
    return dot;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d2 += u[i] != v[i] ? 1.0 : 0.0;
  return std::exp(-spec.gamma * d2);
}

SvrModel::SvrModel(std::vector<double> dual_coeffs, double bias, std::vector<BinaryMask> support_masks,
                   std::vector<double> box, KernelSpec kernel, double epsilon, double c)
    : dual_coeffs_(std::move(dual_coeffs)),
      bias_(bias),
      support_masks_(std::move(support_masks)),
      box_(std::move(box)),
      kernel_(kernel),
      epsilon_(epsilon),
      c_(c) {
  if (dual_coeffs_.size() != support_masks_.size() || box_.size() != support_masks_.size()) {
    throw ContractError("SVR model arrays differ in length");
  }
}

double SvrModel::predict(const BinaryMask& mask) const {
  if (!support_masks_.empty() && mask.size() != d_prime()) {
    throw ContractError("mask length " + std::to_string(mask.size()) + " != model dimension " +
                        std::to_string(d_prime()));
  }
  double g = bias_;
  for (std::size_t i = 0; i < dual_coeffs_.size(); ++i) {
    if (dual_coeffs_[i] != 0.0) g += dual_coeffs_[i] * kernel_eval(kernel_, support_masks_[i], mask);
  }
  return g;
}

double svr_predict(const SvrModel& model, const BinaryMask& mask) { return model.predict(mask); }

double svr_dual_objective(std::span<const double> coeffs, std::span<const BinaryMask> masks,
                          std::span<const double> labels, const KernelSpec& kernel, double epsilon) {
  const std::size_t n = coeffs.size();
  if (masks.size() != n || labels.size() != n) throw ContractError("dual objective: length mismatch");
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (coeffs[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (coeffs[j] != 0.0) quad += coeffs[i] * coeffs[j] * kernel_eval(kernel, masks[i], masks[j]);
    }
    lin += -labels[i] * coeffs[i] + epsilon * std::abs(coeffs[i]);
  }
  return 0.5 * quad + lin;
}

namespace {

// Dual of ε-SVR in libsvm form: 2N variables β = (α, α̂) with signs y = (+1, −1),
//   min ½ βᵀQβ + pᵀβ,  yᵀβ = 0,  0 ≤ β_t ≤ C_t,
// Q_ts = y_t y_s K(t mod N, s mod N), p = (ε − f, ε + f).
class SmoSolver {
 public:
  SmoSolver(std::vector<double> kernel_matrix, std::span<const double> labels, std::span<const double> box,
            double epsilon)
      : n_(labels.size()), l_(2 * n_), k_(std::move(kernel_matrix)), alpha_(l_, 0.0), grad_(l_), box_(l_) {
    for (std::size_t i = 0; i < n_; ++i) {
      grad_[i] = epsilon - labels[i];
      grad_[i + n_] = epsilon + labels[i];
      box_[i] = box_[i + n_] = box[i];
    }
  }

  // Returns the number of pair updates performed.
  std::size_t solve(double tol, std::size_t max_iterations) {
    std::size_t iter = 0;
    for (;;) {
      std::size_t i = 0, j = 0;
      violation_ = select_pair(i, j);
      if (violation_ < tol) return iter;
      if (iter >= max_iterations) {
        std::ostringstream msg;
        msg << "SVR solver did not converge in " << max_iterations << " iterations (max KKT violation "
            << violation_ << ", tol " << tol << ")";
        throw SolverError(msg.str(), violation_);
      }
      update_pair(i, j);
      ++iter;
    }
  }

  double violation() const noexcept { return violation_; }

  std::vector<double> dual_coeffs() const {
    std::vector<double> d(n_);
    for (std::size_t i = 0; i < n_; ++i) d[i] = alpha_[i] - alpha_[i + n_];
    return d;
  }

  // Bias b = −ρ: average y_t G_t over free variables, else the midpoint of
  // the feasible interval.
  double bias() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < l_; ++t) {
      const double yg = y(t) * grad_[t];
      if (at_upper(t)) {
        if (y(t) < 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (y(t) > 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    return -rho;
  }

 private:
  double y(std::size_t t) const { return t < n_ ? 1.0 : -1.0; }
  bool at_upper(std::size_t t) const { return alpha_[t] >= box_[t]; }
  bool at_lower(std::size_t t) const { return alpha_[t] <= 0.0; }
  double kern(std::size_t t, std::size_t s) const { return k_[(t % n_) * n_ + (s % n_)]; }
  double q(std::size_t t, std::size_t s) const { return y(t) * y(s) * kern(t, s); }

  // Maximal violating pair: i maximizes −y G over I_up, j minimizes it over I_low.
  double select_pair(std::size_t& i, std::size_t& j) const {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < l_; ++t) {
      const double v = -y(t) * grad_[t];
      const bool up = y(t) > 0 ? !at_upper(t) : !at_lower(t);
      const bool low = y(t) > 0 ? !at_lower(t) : !at_upper(t);
      if (up && v > gmax) {
        gmax = v;
        i = t;
      }
      if (low && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (!std::isfinite(gmax) || !std::isfinite(gmin)) return 0.0;
    return gmax - gmin;
  }

  void update_pair(std::size_t i, std::size_t j) {
    constexpr double kTau = 1e-12;
    const double ci = box_[i];
    const double cj = box_[j];
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    const double qij = q(i, j);
    const double qii = kern(i, i);
    const double qjj = kern(j, j);
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y(i) != y(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) {
          aj = 0;
          ai = diff;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > ci - cj) {
        if (ai > ci) {
          ai = ci;
          aj = ci - diff;
        }
      } else if (aj > cj) {
        aj = cj;
        ai = cj + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > ci) {
        if (ai > ci) {
          ai = ci;
          aj = sum - ci;
        }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > cj) {
        if (aj > cj) {
          aj = cj;
          ai = sum - cj;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }
    const double di = ai - old_i;
    const double dj = aj - old_j;
    for (std::size_t t = 0; t < l_; ++t) grad_[t] += q(t, i) * di + q(t, j) * dj;
  }

  std::size_t n_;
  std::size_t l_;
  std::vector<double> k_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::vector<double> box_;
  double violation_ = 0.0;
};

}  // namespace

SvrModel fit_svr(const PerturbationSet& data, const KernelSpec& kernel, double c, double epsilon,
                 const SvrSolverOptions& options) {
  kernel.validate();
  data.validate();
  if (!(c > 0.0) || !std::isfinite(c)) throw ContractError("SVR: C must be positive and finite");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ContractError("SVR: epsilon must be >= 0");
  if (!(options.tol > 0.0)) throw ContractError("SVR: tol must be positive");
  const std::size_t n = data.size();
  if (n < 2) throw ContractError("SVR needs at least two samples");

  std::vector<double> box(n);
  for (std::size_t i = 0; i < n; ++i) box[i] = options.weighted_box ? c * data.weights[i] : c;

  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    gram[i * n + i] = kernel_eval(kernel, data.masks[i], data.masks[i]);
    for (std::size_t j = 0; j < i; ++j) {
      gram[i * n + j] = gram[j * n + i] = kernel_eval(kernel, data.masks[i], data.masks[j]);
    }
  }

  SmoSolver solver(std::move(gram), data.labels, box, epsilon);
  const std::size_t iterations = solver.solve(options.tol, options.max_passes * n);
  spdlog::debug("SMO converged after {} iterations (violation {:.3g})", iterations, solver.violation());

  SvrModel model(solver.dual_coeffs(), solver.bias(), data.masks, std::move(box), kernel, epsilon, c);
  model.iterations = iterations;
  model.max_violation = solver.violation();
  return model;
}

double LinearModel::predict(const BinaryMask& mask) const {
  if (mask.size() != coeffs.size()) throw ContractError("mask length does not match linear model");
  double g = intercept;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (mask[j]) g += coeffs[j];
  }
  return g;
}

LinearModel fit_ridge(const PerturbationSet& data, double lambda) {
  data.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractError("ridge: lambda must be >= 0");
  const std::size_t n = data.size();
  const std::size_t d = data.d_prime();

  // Columns: d′ mask features, then the intercept.
  Eigen::MatrixXd design(n, d + 1);
  Eigen::VectorXd target(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sqrt(data.weights[i]);
    for (std::size_t j = 0; j < d; ++j) design(i, j) = data.masks[i][j] ? s : 0.0;
    design(i, d) = s;
    target(i) = s * data.labels[i];
  }

  Eigen::VectorXd solution;
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-12);
    if (qr.rank() < static_cast<Eigen::Index>(d + 1)) {
      throw SingularSystemError("ridge normal equations are singular with lambda = 0; use lambda > 0");
    }
    solution = qr.solve(target);
  } else {
    Eigen::MatrixXd normal = design.transpose() * design;
    normal.diagonal().head(static_cast<Eigen::Index>(d)).array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) throw SingularSystemError("ridge normal equations could not be factored");
    solution = ldlt.solve(design.transpose() * target);
  }

  LinearModel model;
  model.coeffs.assign(solution.data(), solution.data() + d);
  model.intercept = solution(static_cast<Eigen::Index>(d));
  model.lambda = lambda;
  return model;
}

namespace {

template <typename Model>
std::vector<double> toggle_sensitivity(const Model& model, const BinaryMask& reference) {
  const double base = model.predict(reference);
  std::vector<double> out(reference.size());
  BinaryMask probe = reference;
  for (std::size_t j = 0; j < reference.size(); ++j) {
    const bool bit = reference[j];
    probe.set(j, false);
    out[j] = base - model.predict(probe);
    probe.set(j, bit);
  }
  return out;
}

}  // namespace

std::vector<double> attribute(const SvrModel& model, const BinaryMask& reference) {
  return toggle_sensitivity(model, reference);
}

std::vector<double> attribute(const LinearModel& model, const BinaryMask& reference) {
  if (reference.size() != model.coeffs.size()) throw ContractError("reference length does not match linear model");
  // Exact: clearing a set bit removes θ_j, clearing an unset bit changes nothing.
  std::vector<double> out(reference.size(), 0.0);
  for (std::size_t j = 0; j < reference.size(); ++j) out[j] = reference[j] ? model.coeffs[j] : 0.0;
  return out;
}

}  // namespace ledsna
