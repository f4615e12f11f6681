#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ucov/hist.hpp"
#include "ucov/rng.hpp"

namespace ucov {

/// Nuisance parameters theta with their auxiliary measurements and Gaussian
/// constraint widths.
struct NuisanceSet {
  Eigen::VectorXd values;
  Eigen::VectorXd aux;
  Eigen::VectorXd widths;

  std::size_t size() const { return static_cast<std::size_t>(aux.size()); }
  void validate() const;
};

enum class SignalModel { double_gaussian, exponential };
enum class BackgroundModel { uniform, exponential };

/// Everything needed to generate one unfolding scenario: truth-level signal
/// and background densities, expected yields, binnings, the detector
/// constants and the nominal nuisance values, plus the master seed all
/// pseudo-random streams derive from.
struct ScenarioSpec {
  std::string name;
  SignalModel signal_model = SignalModel::double_gaussian;
  std::vector<double> signal_params;  // double_gaussian: {mu1, mu2, sigma1, sigma2}; exponential: {lambda}
  BackgroundModel background_model = BackgroundModel::uniform;
  std::vector<double> background_params;  // uniform: {a, b}; exponential: {gamma}
  double n_sig = 0.0;
  double n_bkg = 0.0;
  BinEdges truth_edges{{0.0, 1.0}};
  BinEdges reco_edges{{0.0, 1.0}};
  double detector_a = 0.0;
  double detector_b = 0.0;
  NuisanceSet nominal;
  std::uint64_t seed = 0;

  void validate() const;
};

/// The paper's two test scenarios with all constants fixed.
ScenarioSpec double_gaussian_scenario(std::uint64_t seed);
ScenarioSpec exponential_scenario(std::uint64_t seed);

std::vector<double> sample_signal(const ScenarioSpec& spec, std::size_t n, RngStream& rng);
std::vector<double> sample_background(const ScenarioSpec& spec, std::size_t n, RngStream& rng);

/// Piecewise detector simulation: the event survives when a uniform draw
/// falls below theta3 - b*|x|/600, in which case the reconstructed value is
/// x + theta1 * Gaus(0, theta2 + a*sqrt(x/300)); otherwise the event is lost.
/// A non-positive smear width is a hard error (unphysical theta sample).
std::optional<double> apply_detector(double x_true, std::span<const double> theta, double a,
                                     double b, RngStream& rng);

/// Smallest smear width over the truth range at the given theta; hybrid toys
/// redraw prior samples for which this is not positive.
double min_smear_width(const ScenarioSpec& spec, std::span<const double> theta);

/// Frozen per-event randomness so the response can be re-evaluated at
/// different theta with common random numbers: the truth positions,
/// efficiency uniforms and smear normals are drawn once and reused, which
/// makes finite differences through the MC well defined.
struct DetectorMcCache {
  std::vector<double> x;      // truth value
  std::vector<double> eps;    // efficiency uniform
  std::vector<double> z;      // unit normal for the smearing
  std::vector<double> sroot;  // a * sqrt(x/300), theta-independent part of the width
  std::vector<double> effx;   // b * |x| / 600, theta-independent part of the efficiency
  std::vector<std::int32_t> truth_bin;  // -1 when outside the truth range

  std::size_t size() const { return x.size(); }
};

enum class TruthSource {
  /// Signal and background truth densities mixed in proportion n_sig : n_bkg,
  /// so every truth bin the scenario populates at all is covered.
  response_mixture,
  background_only,
};

DetectorMcCache make_detector_cache(const ScenarioSpec& spec, TruthSource source, std::size_t n_mc,
                                    RngStream& rng);

/// Response counting over a frozen cache: entry (i, j) is the fraction of
/// cache events with truth in bin j that survive the detector and reconstruct
/// in bin i. Events lost in the detector or reconstructing out of range only
/// enter the denominator. Optional output: denominator counts per truth bin.
void eval_response_from_cache(const ScenarioSpec& spec, const DetectorMcCache& cache,
                              std::span<const double> theta, Eigen::MatrixXd& response,
                              std::vector<std::int64_t>* denominators = nullptr);

/// Expected background on reco edges from a frozen background cache; each
/// surviving event carries weight n_bkg / n_mc so the pre-detector
/// normalization equals n_bkg.
void eval_background_from_cache(const ScenarioSpec& spec, const DetectorMcCache& cache,
                                std::span<const double> theta, Eigen::VectorXd& background);

/// Monte Carlo response matrix at the given theta. Errors when any truth bin
/// receives fewer than 100 denominator events.
ResponseMatrix build_response(const ScenarioSpec& spec, std::span<const double> theta,
                              std::size_t n_mc, RngStream& rng);

/// Monte Carlo expected background histogram at the given theta.
Histogram1D build_background(const ScenarioSpec& spec, std::span<const double> theta,
                             std::size_t n_mc, RngStream& rng);

/// Independent Poisson counts with the given expectations.
Histogram1D generate_observed(const Histogram1D& expectations, RngStream& rng);

/// Analytic per-bin expectation of the signal density on the truth binning,
/// scaled to n_sig. Closed forms exist for both shipped signal families.
Histogram1D truth_expectation(const ScenarioSpec& spec);

}  // namespace ucov
