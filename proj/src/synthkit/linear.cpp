#include "synthkit/linear.hpp"

#include <cmath>

#include "synthkit/error.hpp"

namespace synthkit {

namespace {
constexpr double kRidge = 1e-8;
}

double LinearModel::predict(std::span<const double> x_row) const {
  return layout.encode(x_row).dot(coefficients);
}

LinearModel fit_ols(const Predictors& x, std::span<const double> y) {
  LinearModel model;
  model.layout = DesignLayout::of(x);
  const std::size_t n = y.size();
  const std::size_t p = model.layout.encoded_width();
  if (x.width() > 0 && x.rows() != n) fail(ErrorCode::InvalidArgument, "predictor and target row counts differ");
  if (n <= p) {
    fail(ErrorCode::Fit, "linear fit needs more rows (" + std::to_string(n) + ") than coefficients (" +
                             std::to_string(p) + ")");
  }
  Eigen::MatrixXd design = x.width() > 0 ? model.layout.design(x) : Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1);
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), static_cast<Eigen::Index>(n));

  Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::VectorXd xty = design.transpose() * target;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(p)) {
    model.ridge_fallback = true;
    gram.diagonal().array() += kRidge;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorCode::Fit, "design matrix is singular beyond the ridge fallback");
  model.coefficients = model.ridge_fallback ? Eigen::VectorXd(llt.solve(xty)) : Eigen::VectorXd(qr.solve(target));

  const Eigen::VectorXd resid = target - design * model.coefficients;
  const double rss = resid.squaredNorm();
  const double sigma2 = rss / static_cast<double>(n - p);
  model.residual_sd = std::sqrt(sigma2);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  model.covariance = sigma2 * inv;
  model.standard_errors = model.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  model.rows = n;
  return model;
}

double draw_linear(const LinearModel& model, std::span<const double> x_row, Rng& rng) {
  const double mean = model.predict(x_row);
  if (model.residual_sd == 0.0) return mean;
  return mean + model.residual_sd * standard_normal(rng);
}

}  // namespace synthkit
