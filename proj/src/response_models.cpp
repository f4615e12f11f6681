#include "ucov/response_models.hpp"

#include <cmath>
#include <stdexcept>

#include "ucov/parallel.hpp"

namespace ucov {

ConstantResponseModel::ConstantResponseModel(Eigen::MatrixXd response, Eigen::VectorXd background,
                                             std::size_t n_theta)
    : response_(std::move(response)), background_(std::move(background)), n_theta_(n_theta) {
  if (response_.rows() != background_.size())
    throw std::invalid_argument("ConstantResponseModel: dimension mismatch");
}

void ConstantResponseModel::eval(std::span<const double> theta, Eigen::MatrixXd& response,
                                 Eigen::VectorXd& background) const {
  if (theta.size() != n_theta_)
    throw std::invalid_argument("ConstantResponseModel: wrong theta dimension");
  response = response_;
  background = background_;
}

namespace {

Eigen::VectorXd shape_from_denominators(const std::vector<std::int64_t>& denom) {
  Eigen::VectorXd shape(static_cast<Eigen::Index>(denom.size()));
  double total = 0.0;
  for (std::size_t j = 0; j < denom.size(); ++j) {
    shape(static_cast<Eigen::Index>(j)) = static_cast<double>(denom[j]);
    total += static_cast<double>(denom[j]);
  }
  if (total > 0.0) shape /= total;
  return shape;
}

}  // namespace

McResponseModel::McResponseModel(ScenarioSpec spec, std::size_t n_mc) : spec_(std::move(spec)) {
  spec_.validate();
  RngStream response_rng(spec_.seed, "response_mc");
  response_cache_ = make_detector_cache(spec_, TruthSource::response_mixture, n_mc, response_rng);
  RngStream background_rng(spec_.seed, "background_mc");
  background_cache_ =
      make_detector_cache(spec_, TruthSource::background_only, n_mc, background_rng);

  Eigen::MatrixXd response;
  std::vector<std::int64_t> denom;
  eval_response_from_cache(spec_, response_cache_, std::span<const double>(spec_.nominal.aux.data(), spec_.nominal.size()),
                           response, &denom);
  for (std::size_t j = 0; j < denom.size(); ++j)
    if (denom[j] < 100)
      throw std::runtime_error("McResponseModel: truth bin " + std::to_string(j) +
                               " received only " + std::to_string(denom[j]) +
                               " MC events (minimum 100); increase n_mc");
  truth_shape_ = shape_from_denominators(denom);
}

void McResponseModel::eval(std::span<const double> theta, Eigen::MatrixXd& response,
                           Eigen::VectorXd& background) const {
  eval_response_from_cache(spec_, response_cache_, theta, response);
  eval_background_from_cache(spec_, background_cache_, theta, background);
}

bool McResponseModel::theta_valid(std::span<const double> theta) const {
  return min_smear_width(spec_, theta) > 0.0;
}

GridResponseModel::GridResponseModel(ScenarioSpec spec, std::size_t n_mc, GridConfig config,
                                     unsigned threads)
    : spec_(std::move(spec)), config_(config) {
  spec_.validate();
  if (spec_.nominal.size() != 3)
    throw std::invalid_argument("GridResponseModel: detector model has three nuisance parameters");
  if (config_.points_per_axis < 4)
    throw std::invalid_argument("GridResponseModel: need at least 4 points per axis");

  const std::size_t points = config_.points_per_axis;
  for (std::size_t k = 0; k < 3; ++k) {
    const double center = spec_.nominal.aux(static_cast<Eigen::Index>(k));
    const double width = spec_.nominal.widths(static_cast<Eigen::Index>(k));
    double lo = center - config_.half_width_sigmas * width;
    const double hi = center + config_.half_width_sigmas * width;
    // theta2 is a Gaussian width: keep the whole axis physical.
    if (k == 1 && lo <= 0.0) lo = 0.05 * center;
    if (!(lo < hi)) throw std::invalid_argument("GridResponseModel: degenerate axis range");
    axes_[k].resize(points);
    for (std::size_t p = 0; p < points; ++p)
      axes_[k][p] = lo + (hi - lo) * static_cast<double>(p) / static_cast<double>(points - 1);
  }

  RngStream response_rng(spec_.seed, "response_mc");
  const auto response_cache =
      make_detector_cache(spec_, TruthSource::response_mixture, n_mc, response_rng);
  RngStream background_rng(spec_.seed, "background_mc");
  const auto background_cache =
      make_detector_cache(spec_, TruthSource::background_only, n_mc, background_rng);

  {
    Eigen::MatrixXd response;
    std::vector<std::int64_t> denom;
    eval_response_from_cache(spec_, response_cache, std::span<const double>(spec_.nominal.aux.data(), 3), response,
                             &denom);
    for (std::size_t j = 0; j < denom.size(); ++j)
      if (denom[j] < 100)
        throw std::runtime_error("GridResponseModel: truth bin " + std::to_string(j) +
                                 " received only " + std::to_string(denom[j]) +
                                 " MC events (minimum 100); increase n_mc");
    truth_shape_ = shape_from_denominators(denom);
  }

  const std::size_t n_nodes = points * points * points;
  node_response_.resize(n_nodes);
  node_background_.resize(n_nodes);
  parallel_for(n_nodes, threads, [&](std::size_t idx) {
    const std::size_t p = idx / (points * points);
    const std::size_t q = (idx / points) % points;
    const std::size_t r = idx % points;
    const std::array<double, 3> theta{axes_[0][p], axes_[1][q], axes_[2][r]};
    eval_response_from_cache(spec_, response_cache, theta, node_response_[idx]);
    eval_background_from_cache(spec_, background_cache, theta, node_background_[idx]);
  });
}

std::size_t GridResponseModel::node_index(std::size_t p, std::size_t q, std::size_t r) const {
  const std::size_t points = config_.points_per_axis;
  return (p * points + q) * points + r;
}

namespace {

/// Per-axis Catmull-Rom stencil: four node indices (clamped at the ends) and
/// their weights for a query inside cell [i, i+1].
struct AxisStencil {
  std::array<std::size_t, 4> index;
  std::array<double, 4> weight;
};

AxisStencil axis_stencil(const std::vector<double>& axis, double t) {
  const std::size_t points = axis.size();
  const double lo = axis.front();
  const double hi = axis.back();
  const double step = (hi - lo) / static_cast<double>(points - 1);
  double clamped = std::min(std::max(t, lo), hi);
  double cell_pos = (clamped - lo) / step;
  auto cell = static_cast<std::ptrdiff_t>(std::floor(cell_pos));
  cell = std::min<std::ptrdiff_t>(std::max<std::ptrdiff_t>(cell, 0),
                                  static_cast<std::ptrdiff_t>(points) - 2);
  const double u = cell_pos - static_cast<double>(cell);
  const double u2 = u * u;
  const double u3 = u2 * u;
  AxisStencil s;
  s.weight = {-0.5 * u3 + u2 - 0.5 * u, 1.5 * u3 - 2.5 * u2 + 1.0, -1.5 * u3 + 2.0 * u2 + 0.5 * u,
              0.5 * u3 - 0.5 * u2};
  for (int d = 0; d < 4; ++d) {
    std::ptrdiff_t i = cell - 1 + d;
    i = std::min<std::ptrdiff_t>(std::max<std::ptrdiff_t>(i, 0),
                                 static_cast<std::ptrdiff_t>(points) - 1);
    s.index[static_cast<std::size_t>(d)] = static_cast<std::size_t>(i);
  }
  return s;
}

}  // namespace

void GridResponseModel::eval(std::span<const double> theta, Eigen::MatrixXd& response,
                             Eigen::VectorXd& background) const {
  if (theta.size() != 3) throw std::invalid_argument("GridResponseModel: wrong theta dimension");
  const AxisStencil sp = axis_stencil(axes_[0], theta[0]);
  const AxisStencil sq = axis_stencil(axes_[1], theta[1]);
  const AxisStencil sr = axis_stencil(axes_[2], theta[2]);
  response.setZero(static_cast<Eigen::Index>(reco_bins()), static_cast<Eigen::Index>(truth_bins()));
  background.setZero(static_cast<Eigen::Index>(reco_bins()));
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const double wab = sp.weight[static_cast<std::size_t>(a)] * sq.weight[static_cast<std::size_t>(b)];
      for (int c = 0; c < 4; ++c) {
        const double w = wab * sr.weight[static_cast<std::size_t>(c)];
        if (w == 0.0) continue;
        const std::size_t idx = node_index(sp.index[static_cast<std::size_t>(a)],
                                           sq.index[static_cast<std::size_t>(b)],
                                           sr.index[static_cast<std::size_t>(c)]);
        response.noalias() += w * node_response_[idx];
        background.noalias() += w * node_background_[idx];
      }
    }
  }
}

bool GridResponseModel::theta_valid(std::span<const double> theta) const {
  return min_smear_width(spec_, theta) > 0.0;
}

}  // namespace ucov
