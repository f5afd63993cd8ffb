#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xmes/error.hpp"

namespace xmes {

/// Dense n x d panel of observations, row-major. Rows are observations
/// (time points or replicates), columns are components. Entries must be
/// finite; signs are unrestricted.
class DataMatrix {
 public:
  DataMatrix() = default;

  DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    validate();
  }

  DataMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw Error(ErrorCode::InvalidInput, "ragged rows");
      values_.insert(values_.end(), r.begin(), r.end());
    }
    validate();
  }

  static DataMatrix from_column(std::span<const double> column) {
    return DataMatrix(column.size(), 1, std::vector<double>(column.begin(), column.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  std::span<const double> values() const noexcept { return values_; }

  DataMatrix scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return DataMatrix(rows_, cols_, std::move(v));
  }

  /// Reorders columns so that column j of the result is column perm[j] here.
  DataMatrix permuted_columns(std::span<const std::size_t> perm) const {
    if (perm.size() != cols_) throw Error(ErrorCode::InvalidInput, "permutation size mismatch");
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) v[i * cols_ + j] = (*this)(i, perm[j]);
    return DataMatrix(rows_, cols_, std::move(v));
  }

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

 private:
  void validate() const {
    if (rows_ == 0 || cols_ == 0) throw Error(ErrorCode::InvalidInput, "empty data matrix");
    if (values_.size() != rows_ * cols_)
      throw Error(ErrorCode::InvalidInput,
                  "expected " + std::to_string(rows_ * cols_) + " values, got " +
                      std::to_string(values_.size()));
    for (double v : values_)
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "non-finite entry");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

}  // namespace xmes
