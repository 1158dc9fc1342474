#include "synthkit/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthkit/error.hpp"

namespace synthkit {

namespace {

Eigen::MatrixXd as_matrix(const Eigen::VectorXd& theta, std::size_t classes, std::size_t width) {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(classes - 1), static_cast<Eigen::Index>(width));
  for (std::size_t k = 0; k + 1 < classes; ++k) {
    for (std::size_t j = 0; j < width; ++j) b(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = theta[static_cast<Eigen::Index>(k * width + j)];
  }
  return b;
}

// Inverse of a symmetric positive semi-definite matrix, with a small ridge when
// it is numerically singular.
Eigen::MatrixXd spd_inverse(Eigen::MatrixXd m) {
  const auto p = m.rows();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any()) {
    m.diagonal().array() += 1e-8;
    ldlt.compute(m);
  }
  return ldlt.solve(Eigen::MatrixXd::Identity(p, p));
}

}  // namespace

LogisticObjective::LogisticObjective(const Predictors& x, std::span<const std::int32_t> y,
                                     std::vector<std::int32_t> classes)
    : classes_(std::move(classes)) {
  const DesignLayout layout = DesignLayout::of(x);
  design_ = x.width() > 0 ? layout.design(x) : Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(y.size()), 1);
  label_.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto it = std::find(classes_.begin(), classes_.end(), y[i]);
    if (it == classes_.end()) fail(ErrorCode::InvalidArgument, "target level not among modelled classes");
    label_[i] = static_cast<std::size_t>(it - classes_.begin());
  }
}

Eigen::MatrixXd LogisticObjective::probabilities(const Eigen::VectorXd& theta) const {
  const Eigen::MatrixXd b = as_matrix(theta, classes_.size(), width());
  Eigen::MatrixXd eta = design_ * b.transpose();  // n x (K - 1)
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    const double mx = std::max(0.0, eta.row(i).maxCoeff());
    double denom = std::exp(-mx);
    for (Eigen::Index k = 0; k < eta.cols(); ++k) {
      eta(i, k) = std::exp(eta(i, k) - mx);
      denom += eta(i, k);
    }
    eta.row(i) /= denom;
  }
  return eta;
}

double LogisticObjective::log_likelihood(const Eigen::VectorXd& theta) const {
  const Eigen::MatrixXd b = as_matrix(theta, classes_.size(), width());
  const Eigen::MatrixXd eta = design_ * b.transpose();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    const double mx = std::max(0.0, eta.row(i).maxCoeff());
    double sum = std::exp(-mx);
    for (Eigen::Index k = 0; k < eta.cols(); ++k) sum += std::exp(eta(i, k) - mx);
    const std::size_t c = label_[static_cast<std::size_t>(i)];
    const double own = c == 0 ? 0.0 : eta(i, static_cast<Eigen::Index>(c - 1));
    ll += own - mx - std::log(sum);
  }
  return ll;
}

Eigen::VectorXd LogisticObjective::gradient(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd resid = -probabilities(theta);  // n x (K - 1)
  for (std::size_t i = 0; i < label_.size(); ++i) {
    if (label_[i] > 0) resid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(label_[i] - 1)) += 1.0;
  }
  const Eigen::MatrixXd g = resid.transpose() * design_;  // (K - 1) x p
  Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
  for (Eigen::Index k = 0; k < g.rows(); ++k) out.segment(k * g.cols(), g.cols()) = g.row(k).transpose();
  return out;
}

Eigen::MatrixXd LogisticObjective::information(const Eigen::VectorXd& theta) const {
  const Eigen::MatrixXd prob = probabilities(theta);
  const auto km1 = prob.cols();
  const auto p = design_.cols();
  Eigen::MatrixXd info(km1 * p, km1 * p);
  for (Eigen::Index k = 0; k < km1; ++k) {
    for (Eigen::Index l = k; l < km1; ++l) {
      Eigen::VectorXd w = -prob.col(k).cwiseProduct(prob.col(l));
      if (k == l) w += prob.col(k);
      const Eigen::MatrixXd block = design_.transpose() * (design_.array().colwise() * w.array()).matrix();
      info.block(k * p, l * p, p, p) = block;
      if (k != l) info.block(l * p, k * p, p, p) = block.transpose();
    }
  }
  return info;
}

std::vector<double> LogisticModel::probabilities(std::span<const double> x_row) const {
  const Eigen::VectorXd x = layout.encode(x_row);
  const Eigen::VectorXd eta = coefficients * x;
  const double mx = std::max(0.0, eta.size() ? eta.maxCoeff() : 0.0);
  std::vector<double> local(classes.size());
  local[0] = std::exp(-mx);
  double denom = local[0];
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    local[static_cast<std::size_t>(k) + 1] = std::exp(eta[k] - mx);
    denom += local[static_cast<std::size_t>(k) + 1];
  }
  std::vector<double> out(level_count, 0.0);
  for (std::size_t k = 0; k < classes.size(); ++k) out[static_cast<std::size_t>(classes[k])] = local[k] / denom;
  return out;
}

LogisticModel fit_logistic(const Predictors& x, std::span<const std::int32_t> y, std::size_t level_count,
                           const LogisticOptions& options) {
  if (x.width() > 0 && x.rows() != y.size()) fail(ErrorCode::InvalidArgument, "predictor and target row counts differ");
  LogisticModel model;
  model.layout = DesignLayout::of(x);
  model.level_count = level_count;
  std::vector<std::size_t> seen(level_count, 0);
  for (auto c : y) {
    if (c < 0 || static_cast<std::size_t>(c) >= level_count) fail(ErrorCode::InvalidArgument, "target code out of range");
    ++seen[static_cast<std::size_t>(c)];
  }
  for (std::size_t l = 0; l < level_count; ++l) {
    if (seen[l]) model.classes.push_back(static_cast<std::int32_t>(l));
  }
  if (model.classes.size() < 2) fail(ErrorCode::Fit, "logistic fit needs at least two classes present");
  const std::size_t p = model.layout.encoded_width();
  if (y.size() <= p) fail(ErrorCode::Fit, "logistic fit needs more rows than encoded predictors");

  const LogisticObjective objective(x, y, model.classes);
  const auto dim = static_cast<Eigen::Index>(objective.parameter_count());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  double ll = objective.log_likelihood(theta);
  const double cap = options.coefficient_cap;

  for (model.iterations = 0; model.iterations < options.max_iter; ++model.iterations) {
    const Eigen::VectorXd g = objective.gradient(theta);
    if (g.cwiseAbs().maxCoeff() < options.tol) break;
    Eigen::MatrixXd info = objective.information(theta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any()) {
      info.diagonal().array() += 1e-8 * std::max(1.0, info.diagonal().maxCoeff());
      ldlt.compute(info);
    }
    const Eigen::VectorXd direction = ldlt.solve(g);

    // Step halving until the log-likelihood does not decrease.
    double step = 1.0;
    Eigen::VectorXd candidate;
    double cand_ll = ll;
    bool accepted = false;
    bool capped = false;
    while (step > 1e-10) {
      candidate = theta + step * direction;
      capped = (candidate.array().abs() > cap).any();
      if (capped) candidate = candidate.cwiseMax(-cap).cwiseMin(cap);
      cand_ll = objective.log_likelihood(candidate);
      if (std::isfinite(cand_ll) && cand_ll >= ll - 1e-12 * std::abs(ll)) {
        accepted = true;
        break;
      }
      step /= 2.0;
    }
    if (!accepted) break;
    if (capped) model.separation = true;
    const bool stalled = (candidate - theta).cwiseAbs().maxCoeff() == 0.0;
    theta = candidate;
    ll = cand_ll;
    if (stalled) break;
  }

  const Eigen::VectorXd g = objective.gradient(theta);
  model.converged = g.cwiseAbs().maxCoeff() < options.tol;
  model.log_likelihood = ll;
  // Complete separation: the score can vanish before the cap is reached while
  // every row is fitted with probability ~1.
  if (-ll < 1e-6 * static_cast<double>(y.size())) model.separation = true;
  const std::size_t k = model.classes.size();
  model.coefficients = as_matrix(theta, k, p);
  const Eigen::MatrixXd cov = spd_inverse(objective.information(theta));
  const Eigen::VectorXd se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  model.standard_errors = as_matrix(se, k, p);
  return model;
}

std::size_t sample_categorical(std::span<const double> probabilities, Rng& rng) {
  if (probabilities.empty()) fail(ErrorCode::InvalidArgument, "empty probability vector");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) fail(ErrorCode::InvalidArgument, "negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "probabilities sum to " + std::to_string(total) + ", not 1");
  }
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    last_positive = i;
    acc += probabilities[i];
    if (u < acc) return i;
  }
  return last_positive;
}

std::int32_t draw_class(const LogisticModel& model, std::span<const double> x_row, Rng& rng) {
  const auto probs = model.probabilities(x_row);
  return static_cast<std::int32_t>(sample_categorical(probs, rng));
}

}  // namespace synthkit
