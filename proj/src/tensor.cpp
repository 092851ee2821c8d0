#include "cqed/tensor.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cqed {

namespace {

std::size_t product(const std::vector<std::size_t> &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const std::vector<std::size_t> &shape) {
  for (auto e : shape)
    if (e == 0) throw std::invalid_argument("DenseTensor: extents must be positive");
}

std::string shape_str(const std::vector<std::size_t> &shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXcd> &m, const char *who) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(who) + ": input has non-finite entries");
}

} // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(product(shape_), Complex{0.0, 0.0});
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<Complex> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (product(shape_) != data_.size())
    throw std::invalid_argument("DenseTensor: shape " + shape_str(shape_) + " does not match " +
                                std::to_string(data_.size()) + " values");
}

DenseTensor DenseTensor::from_matrix(const Eigen::Ref<const Eigen::MatrixXcd> &m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  t.as_matrix(1) = m;
  return t;
}

DenseTensor DenseTensor::identity(std::size_t n) {
  DenseTensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

std::size_t DenseTensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) throw std::out_of_range("DenseTensor: index rank mismatch");
  std::size_t off = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= shape_[axis]) throw std::out_of_range("DenseTensor: index out of range");
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

Complex &DenseTensor::operator()(std::initializer_list<std::size_t> index) {
  return data_[offset(index)];
}

const Complex &DenseTensor::operator()(std::initializer_list<std::size_t> index) const {
  return data_[offset(index)];
}

DenseTensor DenseTensor::reshape(std::vector<std::size_t> shape) const & {
  return DenseTensor(std::move(shape), data_);
}

DenseTensor DenseTensor::reshape(std::vector<std::size_t> shape) && {
  return DenseTensor(std::move(shape), std::move(data_));
}

DenseTensor DenseTensor::permute(std::span<const std::size_t> axes) const {
  const std::size_t r = rank();
  if (axes.size() != r) throw std::invalid_argument("permute: wrong number of axes");
  std::vector<bool> seen(r, false);
  for (auto a : axes) {
    if (a >= r || seen[a]) throw std::invalid_argument("permute: axes are not a permutation");
    seen[a] = true;
  }
  std::vector<std::size_t> new_shape(r);
  for (std::size_t i = 0; i < r; ++i) new_shape[i] = shape_[axes[i]];

  // strides of the source, reordered to follow the destination axes
  std::vector<std::size_t> src_stride(r, 1);
  for (std::size_t i = r; i-- > 1;) src_stride[i - 1] = src_stride[i] * shape_[i];
  std::vector<std::size_t> stride(r);
  for (std::size_t i = 0; i < r; ++i) stride[i] = src_stride[axes[i]];

  DenseTensor out(new_shape);
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t n = 0; n < out.data_.size(); ++n) {
    out.data_[n] = data_[src];
    for (std::size_t ax = r; ax-- > 0;) {
      ++idx[ax];
      src += stride[ax];
      if (idx[ax] < new_shape[ax]) break;
      src -= stride[ax] * new_shape[ax];
      idx[ax] = 0;
    }
  }
  return out;
}

DenseTensor DenseTensor::operator*(Complex s) const {
  DenseTensor out = *this;
  for (auto &v : out.data_) v *= s;
  return out;
}

MatrixMap DenseTensor::as_matrix(std::size_t row_axes) {
  if (row_axes > rank()) throw std::invalid_argument("as_matrix: too many row axes");
  std::size_t rows = 1;
  for (std::size_t i = 0; i < row_axes; ++i) rows *= shape_[i];
  const auto rows_i = static_cast<Eigen::Index>(rows);
  return MatrixMap(data_.data(), rows_i, static_cast<Eigen::Index>(data_.size() / rows));
}

ConstMatrixMap DenseTensor::as_matrix(std::size_t row_axes) const {
  if (row_axes > rank()) throw std::invalid_argument("as_matrix: too many row axes");
  std::size_t rows = 1;
  for (std::size_t i = 0; i < row_axes; ++i) rows *= shape_[i];
  const auto rows_i = static_cast<Eigen::Index>(rows);
  return ConstMatrixMap(data_.data(), rows_i, static_cast<Eigen::Index>(data_.size() / rows));
}

Eigen::MatrixXcd DenseTensor::to_matrix() const {
  if (rank() != 2) throw std::invalid_argument("to_matrix: tensor is not rank 2");
  return as_matrix(1);
}

bool DenseTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const Complex &z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

double DenseTensor::max_abs_diff(const DenseTensor &other) const {
  if (shape_ != other.shape_) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - other.data_[i]));
  return m;
}

double DenseTensor::frobenius_norm() const {
  double s = 0.0;
  for (const auto &v : data_) s += std::norm(v);
  return std::sqrt(s);
}

DenseTensor contract(const DenseTensor &a, const DenseTensor &b, std::span<const AxisPair> axis_pairs) {
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  std::vector<std::size_t> ca, cb;
  std::size_t k = 1;
  for (auto [ia, ib] : axis_pairs) {
    if (ia >= a.rank() || ib >= b.rank()) throw std::invalid_argument("contract: axis out of range");
    if (used_a[ia] || used_b[ib]) throw std::invalid_argument("contract: axis paired twice");
    if (a.extent(ia) != b.extent(ib))
      throw std::invalid_argument("contract: extent mismatch on axes (" + std::to_string(ia) + "," +
                                  std::to_string(ib) + "): " + std::to_string(a.extent(ia)) +
                                  " vs " + std::to_string(b.extent(ib)));
    used_a[ia] = used_b[ib] = true;
    ca.push_back(ia);
    cb.push_back(ib);
    k *= a.extent(ia);
  }
  std::vector<std::size_t> perm_a, perm_b, out_shape;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!used_a[i]) {
      perm_a.push_back(i);
      out_shape.push_back(a.extent(i));
    }
  perm_a.insert(perm_a.end(), ca.begin(), ca.end());
  perm_b = cb;
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!used_b[i]) {
      perm_b.push_back(i);
      out_shape.push_back(b.extent(i));
    }
  const DenseTensor ap = a.permute(perm_a);
  const DenseTensor bp = b.permute(perm_b);
  const std::size_t m = a.size() / k;
  const std::size_t n = b.size() / k;

  if (out_shape.empty()) out_shape.push_back(1);
  DenseTensor out(out_shape);
  ConstMatrixMap am(ap.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  ConstMatrixMap bm(bp.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  MatrixMap om(out.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  om.noalias() = am * bm;
  return out;
}

DenseTensor contract(const DenseTensor &a, const DenseTensor &b, std::initializer_list<AxisPair> axis_pairs) {
  return contract(a, b, std::span<const AxisPair>(axis_pairs.begin(), axis_pairs.size()));
}

DenseTensor TruncatedFactorization::reconstruct() const {
  Eigen::MatrixXcd l = left.to_matrix();
  for (std::size_t i = 0; i < singular_values.size(); ++i) l.col(static_cast<Eigen::Index>(i)) *= singular_values[i];
  return DenseTensor::from_matrix(l * right.to_matrix());
}

SvdBlocks truncated_svd(const Eigen::Ref<const Eigen::MatrixXcd> &m, double cutoff) {
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("truncated_svd: empty matrix");
  if (!(cutoff >= 0.0)) throw std::invalid_argument("truncated_svd: cutoff must be >= 0");
  require_finite(m, "truncated_svd");

  SvdBlocks out;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd &s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  if (smax == 0.0) {
    out.u = Eigen::MatrixXcd::Zero(m.rows(), 1);
    out.u(0, 0) = 1.0;
    out.vh = Eigen::MatrixXcd::Zero(1, m.cols());
    out.vh(0, 0) = 1.0;
    out.s = Eigen::VectorXd::Zero(1);
    return out;
  }
  Eigen::Index keep = 0;
  while (keep < s.size() && s(keep) >= cutoff * smax) ++keep;
  keep = std::max<Eigen::Index>(keep, 1);
  out.total_weight = s.squaredNorm();
  out.discarded_weight = s.tail(s.size() - keep).squaredNorm();
  out.u = svd.matrixU().leftCols(keep);
  out.s = s.head(keep);
  out.vh = svd.matrixV().leftCols(keep).adjoint();
  return out;
}

TruncatedFactorization truncated_svd(const DenseTensor &m, double cutoff) {
  if (m.rank() != 2) throw std::invalid_argument("truncated_svd: tensor is not rank 2");
  SvdBlocks b = truncated_svd(m.to_matrix(), cutoff);
  TruncatedFactorization f;
  f.left = DenseTensor::from_matrix(b.u);
  f.right = DenseTensor::from_matrix(b.vh);
  f.singular_values.assign(b.s.data(), b.s.data() + b.s.size());
  f.discarded_weight = b.discarded_weight;
  return f;
}

Eigen::MatrixXcd matrix_exponential(const Eigen::Ref<const Eigen::MatrixXcd> &m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exponential: matrix is not square");
  if (m.rows() == 0) throw std::invalid_argument("matrix_exponential: empty matrix");
  require_finite(m, "matrix_exponential");
  Eigen::MatrixXcd in = m;
  return in.exp();
}

DenseTensor matrix_exponential(const DenseTensor &m) {
  if (m.rank() != 2) throw std::invalid_argument("matrix_exponential: tensor is not rank 2");
  return DenseTensor::from_matrix(matrix_exponential(m.to_matrix()));
}

} // namespace cqed
