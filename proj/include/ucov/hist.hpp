#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ucov {

/// Strictly increasing bin edges; bins are half-open [lo, hi) except that the
/// global upper edge belongs to the last bin, so the bins partition the
/// declared range exactly.
class BinEdges {
 public:
  explicit BinEdges(std::vector<double> edges);

  std::size_t bin_count() const { return edges_.size() - 1; }
  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }
  double low_edge(std::size_t k) const { return edges_[k]; }
  double high_edge(std::size_t k) const { return edges_[k + 1]; }
  double width(std::size_t k) const { return edges_[k + 1] - edges_[k]; }
  std::span<const double> edges() const { return edges_; }

  /// Bin index containing x, or nullopt when x lies outside the range.
  std::optional<std::size_t> find_bin(double x) const;

  bool operator==(const BinEdges& other) const { return edges_ == other.edges_; }

 private:
  std::vector<double> edges_;
};

/// One-dimensional histogram. Contents are reals so the same container holds
/// observed counts, expectations and weighted MC fills; count-ness is checked
/// by require_counts() where a role demands it. Out-of-range fills go to an
/// overflow tally, not to any bin.
class Histogram1D {
 public:
  explicit Histogram1D(BinEdges edges);
  Histogram1D(BinEdges edges, std::vector<double> contents);

  void fill(double x, double weight = 1.0);

  const BinEdges& edges() const { return edges_; }
  std::size_t bin_count() const { return edges_.bin_count(); }
  const std::vector<double>& contents() const { return contents_; }
  double content(std::size_t k) const { return contents_[k]; }
  void set_content(std::size_t k, double v) { contents_[k] = v; }
  double total() const;
  double overflow() const { return overflow_; }

  Eigen::VectorXd to_vector() const;

  /// Throws unless every bin holds a non-negative integer.
  void require_counts() const;

 private:
  BinEdges edges_;
  std::vector<double> contents_;
  double overflow_ = 0.0;
};

/// Conditional probabilities P(reco bin i | truth bin j); reconstruction
/// efficiency of truth bin j is the j-th column sum, so columns need not sum
/// to one.
class ResponseMatrix {
 public:
  ResponseMatrix(Eigen::MatrixXd entries, BinEdges truth_edges, BinEdges reco_edges);

  const Eigen::MatrixXd& entries() const { return entries_; }
  const BinEdges& truth_edges() const { return truth_edges_; }
  const BinEdges& reco_edges() const { return reco_edges_; }
  std::size_t truth_bins() const { return truth_edges_.bin_count(); }
  std::size_t reco_bins() const { return reco_edges_.bin_count(); }

  Eigen::VectorXd column_sums() const;

 private:
  Eigen::MatrixXd entries_;
  BinEdges truth_edges_;
  BinEdges reco_edges_;
};

}  // namespace ucov
