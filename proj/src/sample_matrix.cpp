#include "msw/sample_matrix.hpp"

#include "msw/error.hpp"

namespace msw {

SampleMatrix::SampleMatrix(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) throw DomainError("sample matrix: need n >= 1 and d >= 1");
  if (!data_.allFinite()) throw DomainError("sample matrix: entries must be finite");
}

Vector SampleMatrix::mean() const { return data_.colwise().mean().transpose(); }

Matrix SampleMatrix::covariance() const {
  const Matrix centred = data_.rowwise() - data_.colwise().mean();
  return centred.transpose() * centred / static_cast<double>(data_.rows());
}

}  // namespace msw
