#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcl/error.hpp"

namespace dcl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One view's dense features: HW vectors of dimension d laid out on an
/// H x W grid. Stored as a d x HW matrix whose column p is the feature at
/// spatial index p = row * W + col.
class FeatureMap {
public:
  FeatureMap() = default;
  FeatureMap(std::size_t d, std::size_t h, std::size_t w);

  /// Builds a map from values in [channel][row][col] order.
  static FeatureMap from_channel_major(std::size_t d, std::size_t h,
                                       std::size_t w,
                                       std::span<const double> values);
  /// Builds a map from a d x HW column matrix.
  static FeatureMap from_columns(std::size_t h, std::size_t w, Matrix columns);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t height() const noexcept { return h_; }
  std::size_t width() const noexcept { return w_; }
  std::size_t positions() const noexcept { return h_ * w_; }

  const Matrix &columns() const noexcept { return data_; }
  Matrix &columns() noexcept { return data_; }
  auto column(std::size_t p) const { return data_.col(static_cast<Eigen::Index>(p)); }

  bool normalized() const noexcept { return normalized_; }
  void set_normalized(bool flag) noexcept { normalized_ = flag; }

  bool same_shape(const FeatureMap &other) const noexcept {
    return dim() == other.dim() && h_ == other.h_ && w_ == other.w_;
  }

  /// Values in [channel][row][col] order.
  std::vector<double> to_channel_major() const;

private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  Matrix data_;
  bool normalized_ = false;
};

struct InstanceVector {
  Vector data;
  bool normalized = false;
};

struct ViewPair {
  FeatureMap view_a;
  FeatureMap view_b;
};

/// N instances with two augmented views each. All maps share (d, H, W).
class ViewPairBatch {
public:
  ViewPairBatch() = default;
  explicit ViewPairBatch(std::vector<ViewPair> instances);

  std::size_t size() const noexcept { return instances_.size(); }
  std::size_t dim() const noexcept;
  std::size_t positions() const noexcept;
  std::size_t height() const noexcept;
  std::size_t width() const noexcept;

  const ViewPair &operator[](std::size_t i) const { return instances_[i]; }
  ViewPair &operator[](std::size_t i) { return instances_[i]; }
  const std::vector<ViewPair> &instances() const noexcept { return instances_; }

  bool normalized() const noexcept;

  /// view_a (view 0) or view_b (view 1) of every instance.
  std::vector<FeatureMap> view(int which) const;

private:
  std::vector<ViewPair> instances_;
};

/// Divides each spatial vector by max(norm, epsilon). Zero columns stay zero.
FeatureMap l2_normalize(const FeatureMap &map, double epsilon = 1e-12);
InstanceVector l2_normalize(const InstanceVector &v, double epsilon = 1e-12);
ViewPairBatch l2_normalize(const ViewPairBatch &batch, double epsilon = 1e-12);

/// Number of columns whose norm does not exceed epsilon (these are the
/// columns l2_normalize leaves at zero).
std::size_t count_degenerate_columns(const FeatureMap &map, double epsilon = 1e-12);
std::size_t count_degenerate_columns(const ViewPairBatch &batch, double epsilon = 1e-12);

double cosine_sim(std::span<const double> x, std::span<const double> y);
double cosine_sim(const Vector &x, const Vector &y);

/// exp(-t * |x - y|^2). Inputs are expected on the unit sphere; the kernel
/// is evaluated on the raw vectors either way.
double gaussian_potential(std::span<const double> x, std::span<const double> y,
                          double t);
double gaussian_potential(const Vector &x, const Vector &y, double t);

/// HW_a x HW_b matrix of cosine similarities between the columns of a and b.
Matrix pairwise_cos_matrix(const FeatureMap &a, const FeatureMap &b);

} // namespace dcl
