#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ucov/objective.hpp"
#include "ucov/simkit.hpp"

namespace ucov {

/// Fixed response and background, independent of theta. Used for problems
/// without detector nuisances and as the degenerate case in tests.
class ConstantResponseModel : public ResponseModel {
 public:
  ConstantResponseModel(Eigen::MatrixXd response, Eigen::VectorXd background,
                        std::size_t n_theta = 0);

  std::size_t reco_bins() const override { return static_cast<std::size_t>(response_.rows()); }
  std::size_t truth_bins() const override { return static_cast<std::size_t>(response_.cols()); }
  std::size_t n_theta() const override { return n_theta_; }
  void eval(std::span<const double> theta, Eigen::MatrixXd& response,
            Eigen::VectorXd& background) const override;

 private:
  Eigen::MatrixXd response_;
  Eigen::VectorXd background_;
  std::size_t n_theta_;
};

/// Monte Carlo response with common random numbers: the per-event randomness
/// is drawn once from streams derived from the scenario seed, then every
/// evaluation re-counts the same events at the requested theta. This is the
/// plain backend; evaluations cost one pass over the MC sample.
class McResponseModel : public ResponseModel {
 public:
  McResponseModel(ScenarioSpec spec, std::size_t n_mc);

  std::size_t reco_bins() const override { return spec_.reco_edges.bin_count(); }
  std::size_t truth_bins() const override { return spec_.truth_edges.bin_count(); }
  std::size_t n_theta() const override { return spec_.nominal.size(); }
  void eval(std::span<const double> theta, Eigen::MatrixXd& response,
            Eigen::VectorXd& background) const override;
  bool theta_valid(std::span<const double> theta) const override;
  Eigen::VectorXd truth_shape() const override { return truth_shape_; }

  const ScenarioSpec& spec() const { return spec_; }

 private:
  ScenarioSpec spec_;
  DetectorMcCache response_cache_;
  DetectorMcCache background_cache_;
  Eigen::VectorXd truth_shape_;
};

struct GridConfig {
  std::size_t points_per_axis = 9;
  double half_width_sigmas = 6.0;
};

/// Response precomputed on a regular grid in theta and interpolated with a
/// tensor-product Catmull-Rom cubic, giving a smooth evaluation cheap enough
/// for toy loops. Nodes are built from the same frozen MC as McResponseModel,
/// so the two backends agree at the nodes. Query coordinates are clamped to
/// the grid box; the box spans half_width_sigmas constraint widths around the
/// auxiliary values, with the smear-width axis kept positive.
class GridResponseModel : public ResponseModel {
 public:
  GridResponseModel(ScenarioSpec spec, std::size_t n_mc, GridConfig config = {},
                    unsigned threads = 0);

  std::size_t reco_bins() const override { return spec_.reco_edges.bin_count(); }
  std::size_t truth_bins() const override { return spec_.truth_edges.bin_count(); }
  std::size_t n_theta() const override { return spec_.nominal.size(); }
  void eval(std::span<const double> theta, Eigen::MatrixXd& response,
            Eigen::VectorXd& background) const override;
  bool theta_valid(std::span<const double> theta) const override;
  Eigen::VectorXd truth_shape() const override { return truth_shape_; }

  const ScenarioSpec& spec() const { return spec_; }

 private:
  std::size_t node_index(std::size_t p, std::size_t q, std::size_t r) const;

  ScenarioSpec spec_;
  GridConfig config_;
  std::array<std::vector<double>, 3> axes_;
  std::vector<Eigen::MatrixXd> node_response_;
  std::vector<Eigen::VectorXd> node_background_;
  Eigen::VectorXd truth_shape_;
};

}  // namespace ucov
