#include "amg/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "amg/error.hpp"

namespace amg {

namespace {

void check_components(const Hyperparameters& h) {
  const auto bad = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(h.lengthscale > 0.0) || !std::isfinite(h.lengthscale)) bad("lengthscale must be > 0");
  if (!(h.signal_variance > 0.0) || !std::isfinite(h.signal_variance)) bad("signal_variance must be > 0");
  if (!(h.noise_variance >= 0.0) || !std::isfinite(h.noise_variance)) bad("noise_variance must be >= 0");
  if (!(h.jitter >= 0.0) || !std::isfinite(h.jitter)) bad("jitter must be >= 0");
}

}  // namespace

void Hyperparameters::validate() const {
  check_components(*this);
  if (!(noise_variance + jitter > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise_variance + jitter must be > 0");
  }
}

double rbf_kernel(WorldPoint a, WorldPoint b, const Hyperparameters& hyper) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double l2 = hyper.lengthscale * hyper.lengthscale;
  return hyper.signal_variance * std::exp(-(dx * dx + dy * dy) / (2.0 * l2));
}

Eigen::MatrixXd gram_matrix(std::span<const WorldPoint> points, const Hyperparameters& hyper) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = hyper.signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = rbf_kernel(points[static_cast<std::size_t>(i)],
                                  points[static_cast<std::size_t>(j)], hyper);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

GprModel GprModel::fit(std::span<const WorldPoint> points, std::span<const double> targets,
                       const Hyperparameters& hyper) {
  // Zero noise and jitter is accepted here: a singular Gram then surfaces
  // as FactorizationFailure instead of a parameter error.
  check_components(hyper);
  if (points.empty()) throw Error(ErrorCode::DimensionMismatch, "GPR needs at least one point");
  if (points.size() != targets.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(points.size()) + " points vs " +
                                                  std::to_string(targets.size()) + " targets");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y) || !std::isfinite(targets[i])) {
      throw Error(ErrorCode::InvalidArgument, "non-finite training input at " + std::to_string(i));
    }
  }

  GprModel model;
  model.points_.assign(points.begin(), points.end());
  model.targets_.assign(targets.begin(), targets.end());
  model.hyper_ = hyper;

  Eigen::MatrixXd k = gram_matrix(points, hyper);
  k.diagonal().array() += hyper.noise_variance + hyper.jitter;

  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::FactorizationFailure,
                "Gram matrix is not positive definite (duplicate points without noise?)");
  }
  model.chol_ = llt.matrixL();
  if ((model.chol_.diagonal().array() <= 0.0).any() || !model.chol_.allFinite()) {
    throw Error(ErrorCode::FactorizationFailure, "Cholesky factor has a non-positive pivot");
  }
  const Eigen::Map<const Eigen::VectorXd> y(model.targets_.data(),
                                            static_cast<Eigen::Index>(model.targets_.size()));
  model.alpha_ = llt.solve(y);
  return model;
}

Eigen::VectorXd GprModel::cross_covariance(WorldPoint query) const {
  Eigen::VectorXd ks(static_cast<Eigen::Index>(points_.size()));
  for (std::size_t i = 0; i < points_.size(); ++i) {
    ks(static_cast<Eigen::Index>(i)) = rbf_kernel(query, points_[i], hyper_);
  }
  return ks;
}

Prediction GprModel::predict(WorldPoint query) const {
  const Eigen::VectorXd ks = cross_covariance(query);
  const double mean = ks.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  const double variance = hyper_.signal_variance - v.squaredNorm();
  return {mean, std::max(variance, kVarianceFloor)};
}

PredictedGrids predict_grid(const GprModel& model, const GridGeometry& geometry) {
  validate_geometry(geometry);
  std::vector<double> mean(geometry.cell_count());
  std::vector<double> variance(geometry.cell_count());
  for (int r = 0; r < geometry.height; ++r) {
    for (int c = 0; c < geometry.width; ++c) {
      const auto p = model.predict(geometry.grid_to_world({r, c}));
      const auto off = geometry.offset({r, c});
      mean[off] = p.mean;
      variance[off] = p.variance;
    }
  }
  return {GridMap(geometry, GridKind::mean, std::move(mean)),
          GridMap(geometry, GridKind::variance, std::move(variance))};
}

}  // namespace amg
