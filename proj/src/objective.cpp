#include "ucov/objective.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ucov {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kModelCacheLimit = 4096;
}  // namespace

Eigen::VectorXd ResponseModel::truth_shape() const {
  const auto m = static_cast<Eigen::Index>(truth_bins());
  return Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
}

void UnfoldingProblem::validate() const {
  if (!model) throw std::invalid_argument("UnfoldingProblem: missing response model");
  observed.require_counts();
  if (observed.bin_count() != model->reco_bins())
    throw std::invalid_argument("UnfoldingProblem: observed binning does not match the model");
  if (constraints.size() != model->n_theta())
    throw std::invalid_argument("UnfoldingProblem: constraint count does not match the model");
  constraints.validate();
  if (tau < 0.0) throw std::invalid_argument("UnfoldingProblem: tau must be non-negative");
}

Eigen::VectorXd ParamVector::packed() const {
  Eigen::VectorXd out(mu.size() + theta.size());
  out.head(mu.size()) = mu;
  out.tail(theta.size()) = theta;
  return out;
}

ParamVector ParamVector::unpack(const Eigen::VectorXd& packed, std::size_t n_truth) {
  const auto m = static_cast<Eigen::Index>(n_truth);
  if (packed.size() < m) throw std::invalid_argument("ParamVector::unpack: vector too short");
  ParamVector p;
  p.mu = packed.head(m);
  p.theta = packed.tail(packed.size() - m);
  return p;
}

Eigen::VectorXd expected_counts(const Eigen::MatrixXd& response, const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& background) {
  if (response.cols() != mu.size() || response.rows() != background.size())
    throw std::invalid_argument("expected_counts: dimension mismatch");
  return response * mu + background;
}

double poisson_loglik(const Eigen::VectorXd& counts, const Eigen::VectorXd& nu) {
  if (counts.size() != nu.size())
    throw std::invalid_argument("poisson_loglik: dimension mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    const double n = counts(i);
    const double v = nu(i);
    if (v < 0.0) return kNegInf;
    if (n > 0.0) {
      if (v <= 0.0) return kNegInf;
      sum += n * std::log(v) - v - std::lgamma(n + 1.0);
    } else {
      sum -= v;
    }
  }
  return sum;
}

double constraint_loglik(const Eigen::VectorXd& theta, const NuisanceSet& constraints) {
  if (theta.size() != constraints.aux.size())
    throw std::invalid_argument("constraint_loglik: dimension mismatch");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double pull = (theta(k) - constraints.aux(k)) / constraints.widths(k);
    sum -= 0.5 * pull * pull;
  }
  return sum;
}

double tikhonov(const Eigen::VectorXd& mu) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k + 2 < mu.size(); ++k) {
    const double d = -mu(k) + 2.0 * mu(k + 1) - mu(k + 2);
    sum += d * d;
  }
  return -sum;
}

Eigen::VectorXd tikhonov_gradient(const Eigen::VectorXd& mu) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mu.size());
  for (Eigen::Index k = 0; k + 2 < mu.size(); ++k) {
    const double d = -mu(k) + 2.0 * mu(k + 1) - mu(k + 2);
    g(k) += 2.0 * d;
    g(k + 1) -= 4.0 * d;
    g(k + 2) += 2.0 * d;
  }
  return g;
}

double theta_fd_step(double width) { return std::max(0.1 * width, 1e-6); }

double mu_fd_step(double mu) { return std::max(1e-3 * std::fabs(mu), 1e-2); }

PhiEvaluator::PhiEvaluator(const UnfoldingProblem& problem) : problem_(problem) {
  counts_ = problem_.observed.to_vector();
  for (Eigen::Index i = 0; i < counts_.size(); ++i)
    lgamma_sum_ += std::lgamma(counts_(i) + 1.0);
}

const PhiEvaluator::ModelPoint& PhiEvaluator::model_at(const Eigen::VectorXd& theta) {
  std::vector<double> key(theta.data(), theta.data() + theta.size());
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  if (cache_.size() >= kModelCacheLimit) cache_.clear();
  ModelPoint point;
  problem_.model->eval(std::span<const double>(key.data(), key.size()), point.response,
                       point.background);
  return cache_.emplace(std::move(key), std::move(point)).first->second;
}

const Eigen::MatrixXd& PhiEvaluator::response_at(const Eigen::VectorXd& theta) {
  return model_at(theta).response;
}

const Eigen::VectorXd& PhiEvaluator::background_at(const Eigen::VectorXd& theta) {
  return model_at(theta).background;
}

double PhiEvaluator::data_term(const Eigen::VectorXd& theta, const Eigen::VectorXd& mu) {
  const ModelPoint& point = model_at(theta);
  const Eigen::VectorXd nu = point.response * mu + point.background;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < counts_.size(); ++i) {
    const double n = counts_(i);
    const double v = nu(i);
    if (v < 0.0) return kNegInf;
    if (n > 0.0) {
      if (v <= 0.0) return kNegInf;
      sum += n * std::log(v) - v;
    } else {
      sum -= v;
    }
  }
  return sum;
}

double PhiEvaluator::phi(const ParamVector& p) {
  const double data = data_term(p.theta, p.mu);
  if (!std::isfinite(data)) return kNegInf;
  return data - lgamma_sum_ + constraint_loglik(p.theta, problem_.constraints) +
         problem_.tau * tikhonov(p.mu);
}

Eigen::VectorXd PhiEvaluator::gradient(const ParamVector& p) {
  const std::size_t m = problem_.n_truth();
  const std::size_t k_count = problem_.n_nuisance();
  Eigen::VectorXd g(static_cast<Eigen::Index>(m + k_count));

  const ModelPoint& point = model_at(p.theta);
  const Eigen::VectorXd nu = point.response * p.mu + point.background;
  Eigen::VectorXd w(nu.size());
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    const double n = counts_(i);
    if (n > 0.0) {
      if (!(nu(i) > 0.0))
        throw std::runtime_error("gradient_phi: expected counts vanish in a populated bin");
      w(i) = n / nu(i) - 1.0;
    } else {
      w(i) = -1.0;
    }
  }
  g.head(static_cast<Eigen::Index>(m)) =
      point.response.transpose() * w + problem_.tau * tikhonov_gradient(p.mu);

  // Nuisance derivatives of the data term by central differences through the
  // model; the constraint part is analytic.
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double width = problem_.constraints.widths(kk);
    const double h = theta_fd_step(width);
    Eigen::VectorXd theta_plus = p.theta, theta_minus = p.theta;
    theta_plus(kk) += h;
    theta_minus(kk) -= h;
    const double up = data_term(theta_plus, p.mu);
    const double down = data_term(theta_minus, p.mu);
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::runtime_error("gradient_phi: non-finite objective at a theta stencil point");
    const double pull = (p.theta(kk) - problem_.constraints.aux(kk)) / (width * width);
    g(static_cast<Eigen::Index>(m + k)) = (up - down) / (2.0 * h) - pull;
  }
  return g;
}

Eigen::MatrixXd PhiEvaluator::hessian(const ParamVector& p) {
  const std::size_t m = problem_.n_truth();
  const std::size_t dim = m + problem_.n_nuisance();
  Eigen::MatrixXd h_matrix(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd packed = p.packed();
  for (std::size_t l = 0; l < dim; ++l) {
    const double step =
        l < m ? mu_fd_step(packed(static_cast<Eigen::Index>(l)))
              : theta_fd_step(problem_.constraints.widths(static_cast<Eigen::Index>(l - m)));
    Eigen::VectorXd plus = packed, minus = packed;
    plus(static_cast<Eigen::Index>(l)) += step;
    minus(static_cast<Eigen::Index>(l)) -= step;
    const Eigen::VectorXd g_plus = gradient(ParamVector::unpack(plus, m));
    const Eigen::VectorXd g_minus = gradient(ParamVector::unpack(minus, m));
    if (!g_plus.allFinite() || !g_minus.allFinite())
      throw std::runtime_error("hessian_phi: non-finite stencil evaluation");
    h_matrix.col(static_cast<Eigen::Index>(l)) = (g_plus - g_minus) / (2.0 * step);
  }
  return 0.5 * (h_matrix + h_matrix.transpose());
}

double phi(const UnfoldingProblem& problem, const ParamVector& p) {
  PhiEvaluator eval(problem);
  return eval.phi(p);
}

Eigen::VectorXd gradient_phi(const UnfoldingProblem& problem, const ParamVector& p) {
  PhiEvaluator eval(problem);
  return eval.gradient(p);
}

Eigen::MatrixXd hessian_phi(const UnfoldingProblem& problem, const ParamVector& p) {
  PhiEvaluator eval(problem);
  return eval.hessian(p);
}

}  // namespace ucov
