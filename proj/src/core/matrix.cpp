#include "emma/core/matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace emma {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("matrix data size does not match shape");
  }
}

Matrix Matrix::slice_rows(std::size_t start, std::size_t count) const {
  Matrix out(count, cols_);
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(start * cols_);
  std::copy(first, first + static_cast<std::ptrdiff_t>(count * cols_), out.data_.begin());
  return out;
}

}  // namespace emma
