#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace headroom {

/** Matern-5/2 hyperparameters, in standardized target units. */
struct GpHyperparameters {
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-4;

  bool operator==(const GpHyperparameters& other) const = default;
};

struct GpConfig {
  std::size_t starts = 8;
  std::uint64_t seed = 0;
  /** Iteration cap of one compass search. */
  std::size_t max_evaluations = 120;
  double min_lengthscale = 0.5;
  double max_lengthscale = 500.0;
  double min_signal_variance = 0.05;
  double max_signal_variance = 20.0;
  double min_noise_variance = 1e-6;
  double max_noise_variance = 1.0;
  /** z-score the targets before fitting; posteriors are reported on the original scale either way. */
  bool standardize = true;
};

/** Hyperparameters used when no start yields a finite likelihood: lengthscale sqrt(dim), unit signal, 1e-4 noise. */
GpHyperparameters fallback_hyperparameters(std::size_t dim);

/** Start points of the likelihood search: the clamped fallback first, then log-uniform draws from the bounds. */
std::vector<GpHyperparameters> start_points(std::size_t dim, const GpConfig& config);

/** k(r) = s2 (1 + sqrt5 r / l + 5 r^2 / (3 l^2)) exp(-sqrt5 r / l). */
double matern52(double distance, const GpHyperparameters& hyper);

/** Cholesky jitter ladder: 0, then 1e-8 growing tenfold to 1e-2. */
inline constexpr double kMinJitter = 1e-8;
inline constexpr double kMaxJitter = 1e-2;

/**
 * Exact Gaussian log marginal likelihood of targets `y` (used as given) at inputs `x` (one row per point).
 * Throws Error("execution") if the covariance stays indefinite after the largest jitter.
 */
double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyperparameters& hyper);

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

class GaussianProcess {
 public:
  /** Maximizes the likelihood by multi-start compass search in log space, then conditions on all points. */
  static GaussianProcess fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpConfig& config = {});

  /**
   * Like `fit`, but searches hyperparameters on the rows `fit_rows` only (a cheaper subset); the model still
   * conditions on every row.
   */
  static GaussianProcess fit_subset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    const std::vector<std::size_t>& fit_rows, const GpConfig& config = {});

  /** Conditions on the data with fixed hyperparameters. */
  static GaussianProcess condition(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyperparameters& hyper,
                                   bool standardize = true);

  /** Adds points without refitting hyperparameters or standardization; extends the Cholesky factor in place. */
  void extend(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

  Posterior posterior(std::span<const double> z) const;

  /** Posterior at each row of `z`. */
  std::vector<Posterior> posterior(const Eigen::MatrixXd& z) const;

  /** Likelihood of the standardized training targets under the model's hyperparameters. */
  double log_marginal_likelihood() const;

  const GpHyperparameters& hyperparameters() const { return hyper_; }
  double jitter() const { return jitter_; }
  double target_mean() const { return mean_; }
  double target_scale() const { return scale_; }
  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  /** Whether the likelihood search succeeded (false: fallback hyperparameters). */
  bool optimized() const { return optimized_; }

 private:
  void factorize();

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;  // standardized
  GpHyperparameters hyper_;
  double mean_ = 0.0;
  double scale_ = 1.0;
  double jitter_ = 0.0;
  bool optimized_ = false;
  Eigen::MatrixXd chol_;  // lower factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_;
};

/** Maximization EI: s (u Phi(u) + phi(u)) with u = (mean - best) / s; max(0, mean - best) when s = 0. */
double expected_improvement(double mean, double variance, double best);

double normal_cdf(double x);
double normal_pdf(double x);

/**
 * Training subset for large archives: the `limit / 2` best targets plus the most recent rows, in ascending row
 * order. Returns every row when there are at most `limit`.
 */
std::vector<std::size_t> select_training_rows(std::span<const double> y, std::size_t limit);

}  // namespace headroom
