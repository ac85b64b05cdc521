#include "ringmix/objectives.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "ringmix/seeding.hpp"

namespace ringmix {
namespace {

void require_dimension(const GradientOracle& oracle, const Eigen::VectorXd& w) {
  if (static_cast<std::size_t>(w.size()) != oracle.dimension()) {
    throw std::invalid_argument("weight vector has dimension " + std::to_string(w.size()) +
                                ", oracle expects " + std::to_string(oracle.dimension()));
  }
}

void require_batch(const BatchDescriptor& batch) {
  if (batch.batch_size == 0) {
    throw std::invalid_argument("batch size must be at least 1");
  }
  if (batch.shard_count == 0 || batch.shard_index >= batch.shard_count) {
    throw std::invalid_argument("invalid shard " + std::to_string(batch.shard_index) + "/" +
                                std::to_string(batch.shard_count));
  }
}

// log(1 + exp(-z)) without overflow.
double softplus_neg(double z) {
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

// 1 / (1 + exp(z))
double sigmoid_neg(double z) {
  if (z >= 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace

QuadraticOracle::QuadraticOracle(Eigen::VectorXd curvature, Eigen::VectorXd optimum,
                                 double noise_scale, std::uint64_t seed)
    : curvature_(std::move(curvature)),
      optimum_(std::move(optimum)),
      noise_scale_(noise_scale),
      seed_(seed) {
  if (curvature_.size() == 0 || curvature_.size() != optimum_.size()) {
    throw std::invalid_argument("quadratic oracle: curvature and optimum must share a non-zero dimension");
  }
  if ((curvature_.array() <= 0.0).any() || !curvature_.allFinite() || !optimum_.allFinite()) {
    throw std::invalid_argument("quadratic oracle: curvature must be positive and finite");
  }
  if (!(noise_scale_ >= 0.0) || !std::isfinite(noise_scale_)) {
    throw std::invalid_argument("quadratic oracle: noise_scale must be finite and >= 0");
  }
}

double QuadraticOracle::loss(const Eigen::VectorXd& w) const {
  require_dimension(*this, w);
  const Eigen::VectorXd e = w - optimum_;
  return 0.5 * e.dot(curvature_.cwiseProduct(e));
}

Eigen::VectorXd QuadraticOracle::full_gradient(const Eigen::VectorXd& w) const {
  require_dimension(*this, w);
  return curvature_.cwiseProduct(w - optimum_);
}

Eigen::VectorXd QuadraticOracle::stochastic_gradient(const Eigen::VectorXd& w,
                                                     const BatchDescriptor& batch) const {
  require_batch(batch);
  Eigen::VectorXd g = full_gradient(w);
  if (noise_scale_ > 0.0) {
    auto rng = make_stream(derive_seed(seed_, {batch.sample_seed}));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = noise_scale_ / std::sqrt(static_cast<double>(batch.batch_size));
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      g[i] += sd * normal(rng);
    }
  }
  return g;
}

LogisticOracle::LogisticOracle(Eigen::MatrixXd features, Eigen::VectorXd labels, double ridge)
    : features_(std::move(features)), labels_(std::move(labels)), ridge_(ridge) {
  if (features_.rows() == 0 || features_.cols() < 2 || labels_.size() != features_.cols()) {
    throw std::invalid_argument("logistic oracle: need d >= 1, n >= 2 and one label per sample");
  }
  if ((labels_.array().abs() != 1.0).any()) {
    throw std::invalid_argument("logistic oracle: labels must be +1 or -1");
  }
  if (!(ridge_ >= 0.0)) {
    throw std::invalid_argument("logistic oracle: ridge must be >= 0");
  }
}

double LogisticOracle::data_loss(const Eigen::VectorXd& w) const {
  require_dimension(*this, w);
  const Eigen::VectorXd margins = (features_.transpose() * w).cwiseProduct(labels_);
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) total += softplus_neg(margins[i]);
  return total / static_cast<double>(margins.size());
}

double LogisticOracle::loss(const Eigen::VectorXd& w) const {
  return data_loss(w) + 0.5 * ridge_ * w.squaredNorm();
}

Eigen::VectorXd LogisticOracle::full_gradient(const Eigen::VectorXd& w) const {
  require_dimension(*this, w);
  const Eigen::Index n = features_.cols();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(features_.rows());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = labels_[i];
    const double margin = y * features_.col(i).dot(w);
    g.noalias() -= (y * sigmoid_neg(margin)) * features_.col(i);
  }
  g /= static_cast<double>(n);
  g += ridge_ * w;
  return g;
}

Eigen::VectorXd LogisticOracle::stochastic_gradient(const Eigen::VectorXd& w,
                                                    const BatchDescriptor& batch) const {
  require_dimension(*this, w);
  require_batch(batch);
  const std::size_t n = samples();
  const std::size_t shard_size =
      (n + batch.shard_count - 1 - batch.shard_index) / batch.shard_count;
  if (shard_size == 0) {
    throw std::invalid_argument("logistic oracle: shard " + std::to_string(batch.shard_index) +
                                " is empty");
  }
  auto rng = make_stream(batch.sample_seed);
  std::uniform_int_distribution<std::size_t> pick(0, shard_size - 1);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(features_.rows());
  for (std::size_t m = 0; m < batch.batch_size; ++m) {
    const auto i = static_cast<Eigen::Index>(batch.shard_index + pick(rng) * batch.shard_count);
    const double y = labels_[i];
    const double margin = y * features_.col(i).dot(w);
    g.noalias() -= (y * sigmoid_neg(margin)) * features_.col(i);
  }
  g /= static_cast<double>(batch.batch_size);
  g += ridge_ * w;
  return g;
}

std::unique_ptr<QuadraticOracle> quadratic_oracle(std::size_t dimension, double condition_number,
                                                  Eigen::VectorXd optimum, double noise_scale,
                                                  std::uint64_t seed) {
  if (dimension == 0) {
    throw std::invalid_argument("quadratic oracle: dimension must be >= 1");
  }
  if (!(condition_number >= 1.0) || !std::isfinite(condition_number)) {
    throw std::invalid_argument("quadratic oracle: condition_number must be >= 1");
  }
  if (static_cast<std::size_t>(optimum.size()) != dimension) {
    throw std::invalid_argument("quadratic oracle: optimum has dimension " +
                                std::to_string(optimum.size()) + ", expected " +
                                std::to_string(dimension));
  }
  Eigen::VectorXd curvature(static_cast<Eigen::Index>(dimension));
  const double log_kappa = std::log(condition_number);
  for (std::size_t i = 0; i < dimension; ++i) {
    // A single coordinate gets curvature 1.
    const double t = dimension == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(dimension - 1);
    curvature[static_cast<Eigen::Index>(i)] = std::exp(t * log_kappa);
  }
  if (dimension > 1) curvature[static_cast<Eigen::Index>(dimension - 1)] = condition_number;
  return std::make_unique<QuadraticOracle>(std::move(curvature), std::move(optimum), noise_scale,
                                           derive_seed(seed, {stream_tag::kOracle}));
}

std::unique_ptr<LogisticOracle> logistic_oracle(std::size_t dimension, std::size_t n_samples,
                                                double separation, std::uint64_t seed) {
  if (dimension == 0 || n_samples < 2) {
    throw std::invalid_argument("logistic oracle: need dimension >= 1 and n_samples >= 2");
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw std::invalid_argument("logistic oracle: separation must be finite and >= 0");
  }
  auto rng = make_stream(derive_seed(seed, {stream_tag::kOracle}));
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dimension);
  const auto n = static_cast<Eigen::Index>(n_samples);

  Eigen::VectorXd direction(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) direction[i] = normal(rng);
  } while (direction.norm() == 0.0);
  direction.normalize();

  Eigen::MatrixXd features(d, n);
  Eigen::VectorXd labels(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const double y = (s % 2 == 0) ? 1.0 : -1.0;
    labels[s] = y;
    for (Eigen::Index i = 0; i < d; ++i) features(i, s) = normal(rng);
    features.col(s) += (y * separation / 2.0) * direction;
  }
  return std::make_unique<LogisticOracle>(std::move(features), std::move(labels));
}

double evaluate_loss(const GradientOracle& oracle, const Eigen::VectorXd& w) {
  require_dimension(oracle, w);
  return oracle.loss(w);
}

double gradient_check(const GradientOracle& oracle, const Eigen::VectorXd& w, double step) {
  require_dimension(oracle, w);
  if (!(step > 0.0)) throw std::invalid_argument("gradient_check: step must be > 0");
  const Eigen::VectorXd analytic = oracle.full_gradient(w);
  Eigen::VectorXd numeric(w.size());
  Eigen::VectorXd probe = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + step;
    const double up = oracle.loss(probe);
    probe[i] = w[i] - step;
    const double down = oracle.loss(probe);
    probe[i] = w[i];
    numeric[i] = (up - down) / (2.0 * step);
  }
  const double scale = std::max(numeric.norm(), analytic.norm());
  return scale == 0.0 ? 0.0 : (numeric - analytic).norm() / scale;
}

std::string_view to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::Quadratic ? "quadratic" : "logistic";
}

}  // namespace ringmix
