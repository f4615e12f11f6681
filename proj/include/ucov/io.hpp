#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "ucov/hist.hpp"

namespace ucov {

/// Shortest round-trippable decimal representation of a double, locale-free.
std::string format_double(double v);

/// Histogram CSV: header line, then one `lo,hi,content` row per bin.
void write_histogram_csv(const std::filesystem::path& path, const Histogram1D& hist);

/// Dense matrix CSV with an index header row and an index lead column.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace ucov
