#include "topogap/matrix.hpp"

#include "topogap/error.hpp"

namespace topogap {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw Error(ErrorKind::DimensionMismatch, "matrix data size does not match shape");
}

}  // namespace topogap
