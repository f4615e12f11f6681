#include "ucov/hist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ucov {

BinEdges::BinEdges(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw std::invalid_argument("BinEdges: need at least two edges");
  for (std::size_t k = 0; k + 1 < edges_.size(); ++k) {
    if (!(edges_[k] < edges_[k + 1]))
      throw std::invalid_argument("BinEdges: edges must be strictly increasing at position " +
                                  std::to_string(k));
  }
}

std::optional<std::size_t> BinEdges::find_bin(double x) const {
  if (x < edges_.front() || x > edges_.back()) return std::nullopt;
  if (x == edges_.back()) return bin_count() - 1;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

Histogram1D::Histogram1D(BinEdges edges)
    : edges_(std::move(edges)), contents_(edges_.bin_count(), 0.0) {}

Histogram1D::Histogram1D(BinEdges edges, std::vector<double> contents)
    : edges_(std::move(edges)), contents_(std::move(contents)) {
  if (contents_.size() != edges_.bin_count())
    throw std::invalid_argument("Histogram1D: contents length does not match bin count");
}

void Histogram1D::fill(double x, double weight) {
  if (weight < 0.0) throw std::invalid_argument("Histogram1D::fill: negative weight");
  if (const auto bin = edges_.find_bin(x))
    contents_[*bin] += weight;
  else
    overflow_ += weight;
}

double Histogram1D::total() const {
  double sum = 0.0;
  for (double c : contents_) sum += c;
  return sum;
}

Eigen::VectorXd Histogram1D::to_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(contents_.data(),
                                           static_cast<Eigen::Index>(contents_.size()));
}

void Histogram1D::require_counts() const {
  for (std::size_t k = 0; k < contents_.size(); ++k) {
    const double c = contents_[k];
    if (c < 0.0 || std::fabs(c - std::round(c)) > 1e-9)
      throw std::invalid_argument("Histogram1D: bin " + std::to_string(k) +
                                  " is not a non-negative integer count");
  }
}

ResponseMatrix::ResponseMatrix(Eigen::MatrixXd entries, BinEdges truth_edges, BinEdges reco_edges)
    : entries_(std::move(entries)),
      truth_edges_(std::move(truth_edges)),
      reco_edges_(std::move(reco_edges)) {
  if (entries_.rows() != static_cast<Eigen::Index>(reco_edges_.bin_count()) ||
      entries_.cols() != static_cast<Eigen::Index>(truth_edges_.bin_count()))
    throw std::invalid_argument("ResponseMatrix: entry dimensions do not match bin counts");
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    double column_sum = 0.0;
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      const double r = entries_(i, j);
      if (r < 0.0 || r > 1.0)
        throw std::invalid_argument("ResponseMatrix: entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") outside [0,1]");
      column_sum += r;
    }
    if (column_sum > 1.0 + 1e-12)
      throw std::invalid_argument("ResponseMatrix: column " + std::to_string(j) +
                                  " sums to more than 1");
  }
}

Eigen::VectorXd ResponseMatrix::column_sums() const {
  return entries_.colwise().sum().transpose();
}

}  // namespace ucov
