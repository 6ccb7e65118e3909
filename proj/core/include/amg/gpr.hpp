#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "amg/grid.hpp"

namespace amg {

struct Hyperparameters {
  double lengthscale = 3.0;      // m
  double signal_variance = 1.0;  // sigma_f^2
  double noise_variance = 0.01;  // sigma_n^2
  double jitter = 1e-10;         // added to the Gram diagonal

  // Throws InvalidArgument unless lengthscale > 0, signal_variance > 0,
  // noise_variance >= 0, jitter >= 0 and noise_variance + jitter > 0.
  void validate() const;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

inline constexpr double kVarianceFloor = 1e-12;

// sigma_f^2 * exp(-|a - b|^2 / (2 l^2))
double rbf_kernel(WorldPoint a, WorldPoint b, const Hyperparameters& hyper) noexcept;

// Zero-mean exact GP regression with an RBF kernel over 2D positions.
class GprModel {
 public:
  // Throws DimensionMismatch (sizes differ or no points), InvalidArgument
  // (non-finite input) or FactorizationFailure (Gram + noise not positive
  // definite).
  static GprModel fit(std::span<const WorldPoint> points, std::span<const double> targets,
                      const Hyperparameters& hyper);

  Prediction predict(WorldPoint query) const;

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<WorldPoint>& points() const noexcept { return points_; }
  const std::vector<double>& targets() const noexcept { return targets_; }
  const Hyperparameters& hyperparameters() const noexcept { return hyper_; }
  // Lower-triangular L with L L^T = K + (sigma_n^2 + jitter) I.
  const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }

 private:
  GprModel() = default;

  Eigen::VectorXd cross_covariance(WorldPoint query) const;

  std::vector<WorldPoint> points_;
  std::vector<double> targets_;
  Hyperparameters hyper_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
};

Eigen::MatrixXd gram_matrix(std::span<const WorldPoint> points, const Hyperparameters& hyper);

struct PredictedGrids {
  GridMap mean;
  GridMap variance;
};

// Evaluates the model at every cell center of `geometry`.
PredictedGrids predict_grid(const GprModel& model, const GridGeometry& geometry);

}  // namespace amg
