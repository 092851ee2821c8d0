#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace cqed {

using Complex = std::complex<double>;
using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

/// Dense complex tensor with row-major (last index fastest) storage.
class DenseTensor {
public:
  DenseTensor() = default;
  /// Zero-initialised tensor of the given shape. Every extent must be positive.
  explicit DenseTensor(std::vector<std::size_t> shape);
  DenseTensor(std::vector<std::size_t> shape, std::vector<Complex> data);

  static DenseTensor from_matrix(const Eigen::Ref<const Eigen::MatrixXcd> &m);
  static DenseTensor identity(std::size_t n);

  std::size_t rank() const { return shape_.size(); }
  const std::vector<std::size_t> &shape() const { return shape_; }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  Complex &operator()(std::initializer_list<std::size_t> index);
  const Complex &operator()(std::initializer_list<std::size_t> index) const;

  /// Same data, new shape; the element count must match.
  DenseTensor reshape(std::vector<std::size_t> shape) const &;
  DenseTensor reshape(std::vector<std::size_t> shape) &&;
  /// result.shape[i] = shape[axes[i]].
  DenseTensor permute(std::span<const std::size_t> axes) const;
  DenseTensor operator*(Complex s) const;

  /// Row-major matrix view grouping the first `row_axes` axes into rows.
  MatrixMap as_matrix(std::size_t row_axes);
  ConstMatrixMap as_matrix(std::size_t row_axes) const;
  Eigen::MatrixXcd to_matrix() const;

  bool all_finite() const;
  double max_abs_diff(const DenseTensor &other) const;
  double frobenius_norm() const;

private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  std::vector<std::size_t> shape_;
  std::vector<Complex> data_;
};

using AxisPair = std::pair<std::size_t, std::size_t>;

/// Sums over each (axis of a, axis of b) pair. The result carries the free
/// axes of `a` followed by the free axes of `b`, each in original order.
DenseTensor contract(const DenseTensor &a, const DenseTensor &b,
                     std::span<const AxisPair> axis_pairs);
DenseTensor contract(const DenseTensor &a, const DenseTensor &b,
                     std::initializer_list<AxisPair> axis_pairs);

struct TruncatedFactorization {
  DenseTensor left;                    // rows x r, orthonormal columns
  std::vector<double> singular_values; // descending, length r
  DenseTensor right;                   // r x cols, orthonormal rows
  double discarded_weight = 0.0;

  std::size_t bond_dimension() const { return singular_values.size(); }
  DenseTensor reconstruct() const;
};

/// Eigen-level result used on hot paths; same contract as TruncatedFactorization.
struct SvdBlocks {
  Eigen::MatrixXcd u;
  Eigen::VectorXd s;
  Eigen::MatrixXcd vh;
  double discarded_weight = 0.0;
  double total_weight = 0.0;
};

/// Singular values with s_i / s_max < cutoff are dropped (at least one is
/// always kept). An all-zero matrix yields one zero singular value.
SvdBlocks truncated_svd(const Eigen::Ref<const Eigen::MatrixXcd> &m, double cutoff);
TruncatedFactorization truncated_svd(const DenseTensor &m, double cutoff);

Eigen::MatrixXcd matrix_exponential(const Eigen::Ref<const Eigen::MatrixXcd> &m);
DenseTensor matrix_exponential(const DenseTensor &m);

} // namespace cqed
