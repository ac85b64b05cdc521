#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace ringmix {

enum class ObjectiveKind { Quadratic, Logistic };

// Identifies one minibatch draw. The same descriptor always yields the same
// minibatch. `shard_count > 1` restricts sampling to indices i with
// i % shard_count == shard_index (logistic only; quadratic noise ignores it).
struct BatchDescriptor {
  std::size_t batch_size = 1;
  std::uint64_t sample_seed = 0;
  std::size_t shard_index = 0;
  std::size_t shard_count = 1;
};

/// Stochastic gradient oracle over a fixed synthetic problem.
///
/// Implementations hold immutable state after construction, so concurrent
/// calls are safe. All evaluations are pure functions of their arguments.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual ObjectiveKind kind() const = 0;
  virtual std::size_t dimension() const = 0;

  // Deterministic full objective.
  virtual double loss(const Eigen::VectorXd& w) const = 0;
  // Noiseless full-batch gradient.
  virtual Eigen::VectorXd full_gradient(const Eigen::VectorXd& w) const = 0;
  virtual Eigen::VectorXd stochastic_gradient(const Eigen::VectorXd& w,
                                              const BatchDescriptor& batch) const = 0;
};

/// f(w) = 1/2 (w - w*)^T A (w - w*), A diagonal with eigenvalues log-spaced
/// over [1, condition_number]. Stochastic gradients add i.i.d. Gaussian noise
/// with per-coordinate standard deviation noise_scale / sqrt(M).
class QuadraticOracle final : public GradientOracle {
 public:
  QuadraticOracle(Eigen::VectorXd curvature, Eigen::VectorXd optimum, double noise_scale,
                  std::uint64_t seed);

  ObjectiveKind kind() const override { return ObjectiveKind::Quadratic; }
  std::size_t dimension() const override { return static_cast<std::size_t>(optimum_.size()); }
  double loss(const Eigen::VectorXd& w) const override;
  Eigen::VectorXd full_gradient(const Eigen::VectorXd& w) const override;
  Eigen::VectorXd stochastic_gradient(const Eigen::VectorXd& w,
                                      const BatchDescriptor& batch) const override;

  const Eigen::VectorXd& curvature() const { return curvature_; }
  const Eigen::VectorXd& optimum() const { return optimum_; }
  double noise_scale() const { return noise_scale_; }

 private:
  Eigen::VectorXd curvature_;
  Eigen::VectorXd optimum_;
  double noise_scale_;
  std::uint64_t seed_;
};

/// Two-class Gaussian data with class means +/- separation/2 along a random
/// unit direction; l2-regularised logistic loss averaged over samples.
class LogisticOracle final : public GradientOracle {
 public:
  static constexpr double kRidge = 1e-4;

  LogisticOracle(Eigen::MatrixXd features, Eigen::VectorXd labels, double ridge = kRidge);

  ObjectiveKind kind() const override { return ObjectiveKind::Logistic; }
  std::size_t dimension() const override { return static_cast<std::size_t>(features_.rows()); }
  double loss(const Eigen::VectorXd& w) const override;
  Eigen::VectorXd full_gradient(const Eigen::VectorXd& w) const override;
  Eigen::VectorXd stochastic_gradient(const Eigen::VectorXd& w,
                                      const BatchDescriptor& batch) const override;

  // Mean logistic loss without the ridge term.
  double data_loss(const Eigen::VectorXd& w) const;

  std::size_t samples() const { return static_cast<std::size_t>(features_.cols()); }
  const Eigen::MatrixXd& features() const { return features_; }  // d x n
  const Eigen::VectorXd& labels() const { return labels_; }      // +/-1
  double ridge() const { return ridge_; }

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd labels_;
  double ridge_;
};

std::unique_ptr<QuadraticOracle> quadratic_oracle(std::size_t dimension, double condition_number,
                                                  Eigen::VectorXd optimum, double noise_scale,
                                                  std::uint64_t seed);

std::unique_ptr<LogisticOracle> logistic_oracle(std::size_t dimension, std::size_t n_samples,
                                                double separation, std::uint64_t seed);

double evaluate_loss(const GradientOracle& oracle, const Eigen::VectorXd& w);

// ||fd - g|| / max(||fd||, ||g||) with central differences on the full
// objective; 0 when both vanish.
double gradient_check(const GradientOracle& oracle, const Eigen::VectorXd& w, double step = 1e-5);

std::string_view to_string(ObjectiveKind kind);

}  // namespace ringmix
