#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "ucov/hist.hpp"
#include "ucov/simkit.hpp"

namespace ucov {

/// Evaluates the detector model at a nuisance point: response matrix R(theta)
/// and expected background beta(theta). Implementations must be deterministic
/// functions of theta (frozen MC randomness or interpolation) so finite
/// differences through them are meaningful.
class ResponseModel {
 public:
  virtual ~ResponseModel() = default;

  virtual std::size_t reco_bins() const = 0;
  virtual std::size_t truth_bins() const = 0;
  virtual std::size_t n_theta() const = 0;

  virtual void eval(std::span<const double> theta, Eigen::MatrixXd& response,
                    Eigen::VectorXd& background) const = 0;

  /// False when theta is unphysical for the model (e.g. non-positive smear
  /// width somewhere on the truth range); such points must be rejected before
  /// they reach eval.
  virtual bool theta_valid(std::span<const double> theta) const {
    (void)theta;
    return true;
  }

  /// Normalized truth-bin occupancy of the underlying MC truth sample; used
  /// to shape fit starting points when binnings differ. Defaults to uniform.
  virtual Eigen::VectorXd truth_shape() const;
};

/// Data, detector model, constraint terms and regularization strength: the
/// ingredients of the objective Phi(mu, theta).
struct UnfoldingProblem {
  Histogram1D observed;
  std::shared_ptr<const ResponseModel> model;
  NuisanceSet constraints;
  double tau = 0.0;

  std::size_t n_reco() const { return observed.bin_count(); }
  std::size_t n_truth() const { return model->truth_bins(); }
  std::size_t n_nuisance() const { return constraints.size(); }
  void validate() const;
};

/// Parameters packed in the order (mu_1..mu_M, theta_1..theta_K).
struct ParamVector {
  Eigen::VectorXd mu;
  Eigen::VectorXd theta;

  Eigen::VectorXd packed() const;
  static ParamVector unpack(const Eigen::VectorXd& packed, std::size_t n_truth);
};

/// nu_i = sum_j R_ij mu_j + beta_i.
Eigen::VectorXd expected_counts(const Eigen::MatrixXd& response, const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& background);

/// Poisson log-likelihood sum_i (n_i log nu_i - nu_i - log n_i!). Returns
/// -infinity when some nu_i <= 0 has n_i > 0 (or nu_i < 0 at all); the
/// optimizer treats that as a rejected point.
double poisson_loglik(const Eigen::VectorXd& counts, const Eigen::VectorXd& nu);

/// Gaussian constraint log-density, additive constants dropped:
/// -1/2 sum_k (theta_k - aux_k)^2 / width_k^2.
double constraint_loglik(const Eigen::VectorXd& theta, const NuisanceSet& constraints);

/// Tikhonov smoothness term: negative sum of squared discrete second
/// differences; zero for fewer than three bins.
double tikhonov(const Eigen::VectorXd& mu);

/// d tikhonov / d mu.
Eigen::VectorXd tikhonov_gradient(const Eigen::VectorXd& mu);

/// Caches model evaluations keyed on theta so gradient and Hessian stencils
/// re-use them; also caches the log n! constant of the data term. Not thread
/// safe: give each fit its own evaluator.
class PhiEvaluator {
 public:
  explicit PhiEvaluator(const UnfoldingProblem& problem);

  double phi(const ParamVector& p);
  Eigen::VectorXd gradient(const ParamVector& p);
  Eigen::MatrixXd hessian(const ParamVector& p);

  /// Model evaluation at theta (memoized).
  const Eigen::MatrixXd& response_at(const Eigen::VectorXd& theta);
  const Eigen::VectorXd& background_at(const Eigen::VectorXd& theta);

  const UnfoldingProblem& problem() const { return problem_; }

 private:
  struct ModelPoint {
    Eigen::MatrixXd response;
    Eigen::VectorXd background;
  };
  const ModelPoint& model_at(const Eigen::VectorXd& theta);
  /// Data term without the log n! constant; used for finite differences.
  double data_term(const Eigen::VectorXd& theta, const Eigen::VectorXd& mu);

  const UnfoldingProblem& problem_;
  Eigen::VectorXd counts_;
  double lgamma_sum_ = 0.0;
  std::map<std::vector<double>, ModelPoint> cache_;
};

double phi(const UnfoldingProblem& problem, const ParamVector& p);
Eigen::VectorXd gradient_phi(const UnfoldingProblem& problem, const ParamVector& p);
Eigen::MatrixXd hessian_phi(const UnfoldingProblem& problem, const ParamVector& p);

/// Finite-difference step sizes used for theta derivatives and the Hessian.
double theta_fd_step(double width);
double mu_fd_step(double mu);

}  // namespace ucov
