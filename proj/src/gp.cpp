#include "headroom/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "headroom/error.hpp"
#include "headroom/rng.hpp"

namespace headroom {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873127623544;
constexpr double kLog2Pi = 1.83787706640934548356065947281123527972;

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
    }
  }
  return d;
}

Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& d, const GpHyperparameters& hyper) {
  return d.unaryExpr([&](double r) { return matern52(r, hyper); });
}

/** Cholesky of `k` + noise I, escalating jitter; returns false when even the largest jitter fails. */
bool factor_with_jitter(const Eigen::MatrixXd& k, double noise, Eigen::MatrixXd& chol, double& jitter) {
  const auto n = k.rows();
  for (double j = 0.0; j <= kMaxJitter * 1.0000001; j = j == 0.0 ? kMinJitter : j * 10.0) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += noise + j;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd l = llt.matrixL();
    bool ok = true;
    for (Eigen::Index i = 0; i < n; ++i) ok = ok && std::isfinite(l(i, i)) && l(i, i) > 0.0;
    if (!ok) continue;
    chol = std::move(l);
    jitter = j;
    return true;
  }
  return false;
}

double lml_from_distances(const Eigen::MatrixXd& d, const Eigen::VectorXd& y, const GpHyperparameters& hyper) {
  Eigen::MatrixXd chol;
  double jitter = 0.0;
  if (!factor_with_jitter(kernel_from_distances(d, hyper), hyper.noise_variance, chol, jitter)) {
    throw Error("execution", "covariance matrix is not positive definite after maximum jitter");
  }
  const auto l = chol.triangularView<Eigen::Lower>();
  const Eigen::VectorXd v = l.solve(y);
  const double log_det = 2.0 * chol.diagonal().array().log().sum();
  return -0.5 * v.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

void check_finite(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (!x.allFinite() || !y.allFinite()) throw Error("argument", "GP training data contains non-finite values");
  if (x.rows() != y.size()) throw Error("argument", "GP inputs and targets differ in length");
}

struct Standardization {
  double mean = 0.0;
  double scale = 1.0;
};

Standardization standardization(const Eigen::VectorXd& y, bool enabled) {
  if (!enabled || y.size() == 0) return {};
  const double mean = y.mean();
  const double variance = (y.array() - mean).square().mean();
  const double scale = std::sqrt(variance);
  return {mean, scale > 1e-12 ? scale : 1.0};
}

std::array<double, 3> to_log(const GpHyperparameters& h) {
  return {std::log(h.lengthscale), std::log(h.signal_variance), std::log(h.noise_variance)};
}

GpHyperparameters from_log(const std::array<double, 3>& t) {
  return {std::exp(t[0]), std::exp(t[1]), std::exp(t[2])};
}

}  // namespace

GpHyperparameters fallback_hyperparameters(std::size_t dim) {
  return {std::sqrt(static_cast<double>(std::max<std::size_t>(dim, 1))), 1.0, 1e-4};
}

std::vector<GpHyperparameters> start_points(std::size_t dim, const GpConfig& config) {
  const std::array<double, 3> lo = {std::log(config.min_lengthscale), std::log(config.min_signal_variance),
                                    std::log(config.min_noise_variance)};
  const std::array<double, 3> hi = {std::log(config.max_lengthscale), std::log(config.max_signal_variance),
                                    std::log(config.max_noise_variance)};
  std::vector<GpHyperparameters> starts;
  auto first = to_log(fallback_hyperparameters(dim));
  for (std::size_t i = 0; i < 3; ++i) first[i] = std::clamp(first[i], lo[i], hi[i]);
  starts.push_back(from_log(first));
  Rng rng(splitmix64(config.seed ^ 0x6770u));
  while (starts.size() < config.starts) {
    std::array<double, 3> t{};
    for (std::size_t i = 0; i < 3; ++i) t[i] = rng.uniform(lo[i], hi[i]);
    starts.push_back(from_log(t));
  }
  if (config.starts == 0) starts.clear();
  return starts;
}

double matern52(double distance, const GpHyperparameters& hyper) {
  const double a = kSqrt5 * distance / hyper.lengthscale;
  return hyper.signal_variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

double log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyperparameters& hyper) {
  check_finite(x, y);
  if (y.size() == 0) throw Error("argument", "log marginal likelihood needs at least one point");
  return lml_from_distances(pairwise_distances(x), y, hyper);
}

GaussianProcess GaussianProcess::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpConfig& config) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return fit_subset(x, y, rows, config);
}

GaussianProcess GaussianProcess::fit_subset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                            const std::vector<std::size_t>& fit_rows, const GpConfig& config) {
  check_finite(x, y);
  if (x.rows() < 2 || fit_rows.size() < 2) throw Error("argument", "GP fit needs at least two observations");

  const auto standard = standardization(y, config.standardize);
  Eigen::MatrixXd xs(static_cast<Eigen::Index>(fit_rows.size()), x.cols());
  Eigen::VectorXd ys(static_cast<Eigen::Index>(fit_rows.size()));
  for (std::size_t i = 0; i < fit_rows.size(); ++i) {
    xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(fit_rows[i]));
    ys(static_cast<Eigen::Index>(i)) = (y(static_cast<Eigen::Index>(fit_rows[i])) - standard.mean) / standard.scale;
  }
  const auto d = pairwise_distances(xs);

  const std::array<double, 3> lo = {std::log(config.min_lengthscale), std::log(config.min_signal_variance),
                                    std::log(config.min_noise_variance)};
  const std::array<double, 3> hi = {std::log(config.max_lengthscale), std::log(config.max_signal_variance),
                                    std::log(config.max_noise_variance)};
  const auto objective = [&](const std::array<double, 3>& t) {
    try {
      const double value = lml_from_distances(d, ys, from_log(t));
      return std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  auto best_value = -std::numeric_limits<double>::infinity();
  std::array<double, 3> best{};
  for (const auto& start : start_points(static_cast<std::size_t>(x.cols()), config)) {
    auto t = to_log(start);
    for (std::size_t i = 0; i < 3; ++i) t[i] = std::clamp(t[i], lo[i], hi[i]);
    double value = objective(t);
    double step = 1.0;
    for (std::size_t evaluations = 1; step > 1e-3 && evaluations < config.max_evaluations;) {
      bool improved = false;
      for (std::size_t i = 0; i < 3 && !improved; ++i) {
        for (const double sign : {1.0, -1.0}) {
          auto trial = t;
          trial[i] = std::clamp(trial[i] + sign * step, lo[i], hi[i]);
          if (trial[i] == t[i]) continue;
          const double trial_value = objective(trial);
          ++evaluations;
          if (trial_value > value) {
            t = trial;
            value = trial_value;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (value > best_value) {
      best_value = value;
      best = t;
    }
  }

  const bool optimized = std::isfinite(best_value);
  const auto hyper = optimized ? from_log(best) : fallback_hyperparameters(static_cast<std::size_t>(x.cols()));
  auto model = condition(x, y, hyper, config.standardize);
  model.optimized_ = optimized;
  return model;
}

GaussianProcess GaussianProcess::condition(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                           const GpHyperparameters& hyper, bool standardize) {
  check_finite(x, y);
  if (x.rows() < 1) throw Error("argument", "GP needs at least one observation");
  if (!(hyper.lengthscale > 0.0 && hyper.signal_variance > 0.0 && hyper.noise_variance >= 0.0)) {
    throw Error("argument", "GP hyperparameters must be positive");
  }
  GaussianProcess model;
  const auto standard = standardization(y, standardize);
  model.x_ = x;
  model.mean_ = standard.mean;
  model.scale_ = standard.scale;
  model.y_ = (y.array() - standard.mean) / standard.scale;
  model.hyper_ = hyper;
  model.factorize();
  return model;
}

void GaussianProcess::factorize() {
  if (!factor_with_jitter(kernel_from_distances(pairwise_distances(x_), hyper_), hyper_.noise_variance, chol_,
                          jitter_)) {
    throw Error("execution", "covariance matrix is not positive definite after maximum jitter");
  }
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(y_);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

void GaussianProcess::extend(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_finite(x, y);
  if (x.rows() == 0) return;
  if (x.cols() != x_.cols()) throw Error("argument", "GP input dimension mismatch");
  const auto n = x_.rows();
  const auto m = x.rows();

  Eigen::MatrixXd cross(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) cross(i, j) = matern52((x_.row(i) - x.row(j)).norm(), hyper_);
  }
  Eigen::MatrixXd corner = kernel_from_distances(pairwise_distances(x), hyper_);
  corner.diagonal().array() += hyper_.noise_variance + jitter_;

  x_.conservativeResize(n + m, Eigen::NoChange);
  x_.bottomRows(m) = x;
  y_.conservativeResize(n + m);
  y_.tail(m) = (y.array() - mean_) / scale_;

  const Eigen::MatrixXd l21 = chol_.triangularView<Eigen::Lower>().solve(cross).transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(corner - l21 * l21.transpose());
  bool ok = llt.info() == Eigen::Success;
  Eigen::MatrixXd l22;
  if (ok) {
    l22 = llt.matrixL();
    for (Eigen::Index i = 0; i < m; ++i) ok = ok && std::isfinite(l22(i, i)) && l22(i, i) > 0.0;
  }
  if (!ok) {
    factorize();
    return;
  }
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(n + m, n + m);
  chol.topLeftCorner(n, n) = chol_;
  chol.bottomLeftCorner(m, n) = l21;
  chol.bottomRightCorner(m, m) = l22;
  chol_ = std::move(chol);
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(y_);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

Posterior GaussianProcess::posterior(std::span<const double> z) const {
  if (static_cast<Eigen::Index>(z.size()) != x_.cols()) throw Error("argument", "GP input dimension mismatch");
  const Eigen::Map<const Eigen::RowVectorXd> point(z.data(), static_cast<Eigen::Index>(z.size()));
  if (!point.allFinite()) throw Error("argument", "posterior input is not finite");
  Eigen::VectorXd k(x_.rows());
  for (Eigen::Index i = 0; i < x_.rows(); ++i) k(i) = matern52((x_.row(i) - point).norm(), hyper_);
  const double mean = k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  const double variance = std::max(0.0, hyper_.signal_variance - v.squaredNorm());
  return {mean_ + scale_ * mean, scale_ * scale_ * variance};
}

std::vector<Posterior> GaussianProcess::posterior(const Eigen::MatrixXd& z) const {
  if (z.cols() != x_.cols()) throw Error("argument", "GP input dimension mismatch");
  if (!z.allFinite()) throw Error("argument", "posterior input is not finite");
  const Eigen::VectorXd train_norms = x_.rowwise().squaredNorm();
  const Eigen::VectorXd query_norms = z.rowwise().squaredNorm();
  Eigen::MatrixXd k = x_ * z.transpose();
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      const double squared = std::max(0.0, train_norms(i) + query_norms(j) - 2.0 * k(i, j));
      k(i, j) = matern52(std::sqrt(squared), hyper_);
    }
  }
  const Eigen::VectorXd means = k.transpose() * alpha_;
  chol_.triangularView<Eigen::Lower>().solveInPlace(k);
  const Eigen::VectorXd explained = k.colwise().squaredNorm().transpose();

  std::vector<Posterior> result(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index j = 0; j < z.rows(); ++j) {
    const double variance = std::max(0.0, hyper_.signal_variance - explained(j));
    result[static_cast<std::size_t>(j)] = {mean_ + scale_ * means(j), scale_ * scale_ * variance};
  }
  return result;
}

double GaussianProcess::log_marginal_likelihood() const {
  return lml_from_distances(pairwise_distances(x_), y_, hyper_);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double expected_improvement(double mean, double variance, double best) {
  const double sigma = std::sqrt(std::max(0.0, variance));
  if (!(sigma > 0.0)) return std::max(0.0, mean - best);
  const double u = (mean - best) / sigma;
  return std::max(0.0, sigma * (u * normal_cdf(u) + normal_pdf(u)));
}

std::vector<std::size_t> select_training_rows(std::span<const double> y, std::size_t limit) {
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  if (y.size() <= limit) return rows;
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
  std::vector<bool> chosen(y.size(), false);
  std::size_t count = 0;
  for (std::size_t i = 0; i < limit / 2; ++i, ++count) chosen[rows[i]] = true;
  for (std::size_t i = y.size(); i-- > 0 && count < limit;) {
    if (!chosen[i]) {
      chosen[i] = true;
      ++count;
    }
  }
  std::vector<std::size_t> result;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (chosen[i]) result.push_back(i);
  }
  return result;
}

}  // namespace headroom
