#include "ucov/simkit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ucov {

namespace {

double gauss_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

std::vector<double> linspace_edges(double lo, double hi, std::size_t bins) {
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k)
    edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  return edges;
}

}  // namespace

void NuisanceSet::validate() const {
  if (values.size() != aux.size() || aux.size() != widths.size())
    throw std::invalid_argument("NuisanceSet: values, aux and widths must have equal length");
  for (Eigen::Index k = 0; k < widths.size(); ++k)
    if (!(widths(k) > 0.0))
      throw std::invalid_argument("NuisanceSet: width " + std::to_string(k) +
                                  " must be positive");
}

void ScenarioSpec::validate() const {
  if (!(n_sig > 0.0)) throw std::invalid_argument("ScenarioSpec: n_sig must be positive");
  if (n_bkg < 0.0) throw std::invalid_argument("ScenarioSpec: n_bkg must be non-negative");
  const std::size_t want_signal = signal_model == SignalModel::double_gaussian ? 4u : 1u;
  if (signal_params.size() != want_signal)
    throw std::invalid_argument("ScenarioSpec: wrong number of signal parameters");
  const std::size_t want_bkg = background_model == BackgroundModel::uniform ? 2u : 1u;
  if (background_params.size() != want_bkg)
    throw std::invalid_argument("ScenarioSpec: wrong number of background parameters");
  nominal.validate();
}

ScenarioSpec double_gaussian_scenario(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.name = "double_gaussian";
  spec.signal_model = SignalModel::double_gaussian;
  spec.signal_params = {1.5, -1.5, 0.12, 0.12};
  spec.background_model = BackgroundModel::uniform;
  spec.background_params = {-4.0, 4.0};
  spec.n_sig = 50000.0;
  spec.n_bkg = 5000.0;
  spec.truth_edges = BinEdges(linspace_edges(-4.0, 4.0, 5));
  spec.reco_edges = BinEdges(linspace_edges(-4.0, 4.0, 5));
  spec.detector_a = 0.0;
  spec.detector_b = 0.0;
  spec.nominal.aux = Eigen::Vector3d(1.0, 0.3, 0.95);
  spec.nominal.values = spec.nominal.aux;
  spec.nominal.widths = Eigen::Vector3d(0.01, 0.05, 0.02);
  spec.seed = seed;
  return spec;
}

ScenarioSpec exponential_scenario(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.name = "exponential";
  spec.signal_model = SignalModel::exponential;
  spec.signal_params = {0.14};
  spec.background_model = BackgroundModel::exponential;
  spec.background_params = {0.15};
  spec.n_sig = 10000.0;
  spec.n_bkg = 40000.0;
  spec.truth_edges = BinEdges({0, 2, 4, 6, 8, 10, 12, 14, 18, 25, 35, 60});
  spec.reco_edges = BinEdges({0,  1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12,
                              13, 14, 15, 16, 17, 18, 20, 25, 30, 35, 45, 60});
  spec.detector_a = 1.0;
  spec.detector_b = 1.0;
  spec.nominal.aux = Eigen::Vector3d(1.0, 0.3, 0.95);
  spec.nominal.values = spec.nominal.aux;
  spec.nominal.widths = Eigen::Vector3d(0.01, 0.05, 0.02);
  spec.seed = seed;
  return spec;
}

std::vector<double> sample_signal(const ScenarioSpec& spec, std::size_t n, RngStream& rng) {
  std::vector<double> out;
  out.reserve(n);
  switch (spec.signal_model) {
    case SignalModel::double_gaussian: {
      const double mu1 = spec.signal_params[0], mu2 = spec.signal_params[1];
      const double s1 = spec.signal_params[2], s2 = spec.signal_params[3];
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < 0.5)
          out.push_back(rng.gaussian(mu1, s1));
        else
          out.push_back(rng.gaussian(mu2, s2));
      }
      break;
    }
    case SignalModel::exponential: {
      const double lambda = spec.signal_params[0];
      for (std::size_t i = 0; i < n; ++i) out.push_back(rng.exponential(lambda));
      break;
    }
    default:
      throw std::invalid_argument("sample_signal: unknown signal model");
  }
  return out;
}

std::vector<double> sample_background(const ScenarioSpec& spec, std::size_t n, RngStream& rng) {
  std::vector<double> out;
  out.reserve(n);
  switch (spec.background_model) {
    case BackgroundModel::uniform: {
      const double a = spec.background_params[0], b = spec.background_params[1];
      for (std::size_t i = 0; i < n; ++i) out.push_back(rng.uniform_in(a, b));
      break;
    }
    case BackgroundModel::exponential: {
      const double gamma = spec.background_params[0];
      for (std::size_t i = 0; i < n; ++i) out.push_back(rng.exponential(gamma));
      break;
    }
    default:
      throw std::invalid_argument("sample_background: unknown background model");
  }
  return out;
}

namespace {

double smear_width_at(double x, double theta2, double a) {
  if (a != 0.0 && x < 0.0)
    throw std::invalid_argument("detector: x_true must be non-negative when a != 0");
  return theta2 + a * std::sqrt(x / 300.0);
}

}  // namespace

std::optional<double> apply_detector(double x_true, std::span<const double> theta, double a,
                                     double b, RngStream& rng) {
  if (theta.size() < 3) throw std::invalid_argument("apply_detector: need three nuisance values");
  const double eps = rng.uniform();
  const double threshold = theta[2] - b * std::fabs(x_true) / 600.0;
  if (!(eps > 0.0 && eps < threshold)) return std::nullopt;
  const double width = smear_width_at(x_true, theta[1], a);
  if (!(width > 0.0))
    throw std::domain_error("apply_detector: non-positive smear width " + std::to_string(width));
  return x_true + theta[0] * rng.gaussian(0.0, width);
}

double min_smear_width(const ScenarioSpec& spec, std::span<const double> theta) {
  const double lo = smear_width_at(spec.truth_edges.lo(), theta[1], spec.detector_a);
  const double hi = smear_width_at(spec.truth_edges.hi(), theta[1], spec.detector_a);
  return std::min(lo, hi);
}

DetectorMcCache make_detector_cache(const ScenarioSpec& spec, TruthSource source,
                                    std::size_t n_mc, RngStream& rng) {
  DetectorMcCache cache;
  cache.x.reserve(n_mc);
  std::size_t n_signal = 0;
  if (source == TruthSource::response_mixture) {
    const double total = spec.n_sig + spec.n_bkg;
    n_signal = total > 0.0
                   ? static_cast<std::size_t>(std::llround(n_mc * (spec.n_sig / total)))
                   : n_mc;
  }
  {
    auto sig = sample_signal(spec, n_signal, rng);
    cache.x.insert(cache.x.end(), sig.begin(), sig.end());
    auto bkg = sample_background(spec, n_mc - n_signal, rng);
    cache.x.insert(cache.x.end(), bkg.begin(), bkg.end());
  }
  cache.eps.resize(n_mc);
  cache.z.resize(n_mc);
  cache.sroot.resize(n_mc);
  cache.effx.resize(n_mc);
  cache.truth_bin.resize(n_mc);
  for (std::size_t t = 0; t < n_mc; ++t) {
    cache.eps[t] = rng.uniform();
    cache.z[t] = rng.gaussian(0.0, 1.0);
    const double x = cache.x[t];
    cache.sroot[t] =
        spec.detector_a != 0.0 ? spec.detector_a * std::sqrt(std::max(x, 0.0) / 300.0) : 0.0;
    if (spec.detector_a != 0.0 && x < 0.0)
      throw std::invalid_argument("detector cache: x_true must be non-negative when a != 0");
    cache.effx[t] = spec.detector_b * std::fabs(x) / 600.0;
    const auto bin = spec.truth_edges.find_bin(x);
    cache.truth_bin[t] = bin ? static_cast<std::int32_t>(*bin) : -1;
  }
  return cache;
}

void eval_response_from_cache(const ScenarioSpec& spec, const DetectorMcCache& cache,
                              std::span<const double> theta, Eigen::MatrixXd& response,
                              std::vector<std::int64_t>* denominators) {
  const std::size_t n_reco = spec.reco_edges.bin_count();
  const std::size_t n_truth = spec.truth_edges.bin_count();
  response.setZero(static_cast<Eigen::Index>(n_reco), static_cast<Eigen::Index>(n_truth));
  std::vector<std::int64_t> denom(n_truth, 0);
  const double theta1 = theta[0], theta2 = theta[1], theta3 = theta[2];
  for (std::size_t t = 0; t < cache.size(); ++t) {
    const std::int32_t tb = cache.truth_bin[t];
    if (tb < 0) continue;
    ++denom[static_cast<std::size_t>(tb)];
    const double eps = cache.eps[t];
    if (!(eps > 0.0 && eps < theta3 - cache.effx[t])) continue;
    const double width = theta2 + cache.sroot[t];
    if (!(width > 0.0))
      throw std::domain_error("response evaluation: non-positive smear width " +
                              std::to_string(width));
    const double x_reco = cache.x[t] + theta1 * width * cache.z[t];
    if (const auto rb = spec.reco_edges.find_bin(x_reco))
      response(static_cast<Eigen::Index>(*rb), tb) += 1.0;
  }
  for (std::size_t j = 0; j < n_truth; ++j)
    if (denom[j] > 0) response.col(static_cast<Eigen::Index>(j)) /= static_cast<double>(denom[j]);
  if (denominators) *denominators = std::move(denom);
}

void eval_background_from_cache(const ScenarioSpec& spec, const DetectorMcCache& cache,
                                std::span<const double> theta, Eigen::VectorXd& background) {
  background.setZero(static_cast<Eigen::Index>(spec.reco_edges.bin_count()));
  if (cache.size() == 0 || spec.n_bkg == 0.0) return;
  const double weight = spec.n_bkg / static_cast<double>(cache.size());
  const double theta1 = theta[0], theta2 = theta[1], theta3 = theta[2];
  for (std::size_t t = 0; t < cache.size(); ++t) {
    const double eps = cache.eps[t];
    if (!(eps > 0.0 && eps < theta3 - cache.effx[t])) continue;
    const double width = theta2 + cache.sroot[t];
    if (!(width > 0.0))
      throw std::domain_error("background evaluation: non-positive smear width " +
                              std::to_string(width));
    const double x_reco = cache.x[t] + theta1 * width * cache.z[t];
    if (const auto rb = spec.reco_edges.find_bin(x_reco))
      background(static_cast<Eigen::Index>(*rb)) += weight;
  }
}

ResponseMatrix build_response(const ScenarioSpec& spec, std::span<const double> theta,
                              std::size_t n_mc, RngStream& rng) {
  const auto cache = make_detector_cache(spec, TruthSource::response_mixture, n_mc, rng);
  Eigen::MatrixXd entries;
  std::vector<std::int64_t> denom;
  eval_response_from_cache(spec, cache, theta, entries, &denom);
  for (std::size_t j = 0; j < denom.size(); ++j) {
    if (denom[j] == 0)
      throw std::runtime_error("build_response: truth bin " + std::to_string(j) +
                               " received no MC events; increase n_mc");
    if (denom[j] < 100)
      throw std::runtime_error("build_response: truth bin " + std::to_string(j) +
                               " received only " + std::to_string(denom[j]) +
                               " MC events (minimum 100); increase n_mc");
  }
  return ResponseMatrix(std::move(entries), spec.truth_edges, spec.reco_edges);
}

Histogram1D build_background(const ScenarioSpec& spec, std::span<const double> theta,
                             std::size_t n_mc, RngStream& rng) {
  const auto cache = make_detector_cache(spec, TruthSource::background_only, n_mc, rng);
  Eigen::VectorXd beta;
  eval_background_from_cache(spec, cache, theta, beta);
  std::vector<double> contents(beta.data(), beta.data() + beta.size());
  return Histogram1D(spec.reco_edges, std::move(contents));
}

Histogram1D generate_observed(const Histogram1D& expectations, RngStream& rng) {
  std::vector<double> counts(expectations.bin_count());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double nu = expectations.content(k);
    if (nu < 0.0)
      throw std::invalid_argument("generate_observed: negative expectation in bin " +
                                  std::to_string(k));
    counts[k] = static_cast<double>(rng.poisson(nu));
  }
  return Histogram1D(expectations.edges(), std::move(counts));
}

Histogram1D truth_expectation(const ScenarioSpec& spec) {
  std::vector<double> contents(spec.truth_edges.bin_count());
  for (std::size_t k = 0; k < contents.size(); ++k) {
    const double lo = spec.truth_edges.low_edge(k);
    const double hi = spec.truth_edges.high_edge(k);
    double prob = 0.0;
    switch (spec.signal_model) {
      case SignalModel::double_gaussian: {
        const double mu1 = spec.signal_params[0], mu2 = spec.signal_params[1];
        const double s1 = spec.signal_params[2], s2 = spec.signal_params[3];
        prob = 0.5 * (gauss_cdf(hi, mu1, s1) - gauss_cdf(lo, mu1, s1)) +
               0.5 * (gauss_cdf(hi, mu2, s2) - gauss_cdf(lo, mu2, s2));
        break;
      }
      case SignalModel::exponential: {
        const double lambda = spec.signal_params[0];
        prob = std::exp(-lambda * lo) - std::exp(-lambda * hi);
        break;
      }
    }
    contents[k] = spec.n_sig * prob;
  }
  return Histogram1D(spec.truth_edges, std::move(contents));
}

}  // namespace ucov
