#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace msw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n samples in d dimensions, one sample per row. Immutable once built.
class SampleMatrix {
 public:
  /// Throws DomainError when empty or when any entry is NaN/Inf.
  explicit SampleMatrix(RowMatrix data);

  std::size_t n() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(data_.cols()); }
  const RowMatrix& data() const { return data_; }
  auto row(std::size_t i) const { return data_.row(static_cast<Eigen::Index>(i)); }

  Vector mean() const;
  /// Covariance with the 1/n normalization about the sample mean.
  Matrix covariance() const;

 private:
  RowMatrix data_;
};

}  // namespace msw
