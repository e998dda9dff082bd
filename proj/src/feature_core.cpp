#include "dcl/feature_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dcl {

namespace {

void require_extents(std::size_t d, std::size_t h, std::size_t w) {
  if (d == 0 || h == 0 || w == 0)
    fail(ErrorCode::InvalidInput, "feature map extents must be positive, got d=" +
                                      std::to_string(d) + " H=" + std::to_string(h) +
                                      " W=" + std::to_string(w));
}

void require_finite(const Matrix &m) {
  if (!m.allFinite())
    fail(ErrorCode::InvalidInput, "feature map contains non-finite values");
}

} // namespace

FeatureMap::FeatureMap(std::size_t d, std::size_t h, std::size_t w)
    : h_(h), w_(w), data_(Matrix::Zero(static_cast<Eigen::Index>(d),
                                       static_cast<Eigen::Index>(h * w))) {
  require_extents(d, h, w);
}

FeatureMap FeatureMap::from_channel_major(std::size_t d, std::size_t h, std::size_t w,
                                          std::span<const double> values) {
  FeatureMap map(d, h, w);
  const std::size_t hw = h * w;
  if (values.size() != d * hw)
    fail(ErrorCode::InvalidInput, "expected " + std::to_string(d * hw) +
                                      " values, got " + std::to_string(values.size()));
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t p = 0; p < hw; ++p)
      map.data_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p)) =
          values[c * hw + p];
  require_finite(map.data_);
  return map;
}

FeatureMap FeatureMap::from_columns(std::size_t h, std::size_t w, Matrix columns) {
  require_extents(static_cast<std::size_t>(columns.rows()), h, w);
  if (static_cast<std::size_t>(columns.cols()) != h * w)
    fail(ErrorCode::InvalidInput, "column count does not match H*W");
  require_finite(columns);
  FeatureMap map;
  map.h_ = h;
  map.w_ = w;
  map.data_ = std::move(columns);
  return map;
}

std::vector<double> FeatureMap::to_channel_major() const {
  const std::size_t d = dim(), hw = positions();
  std::vector<double> out(d * hw);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t p = 0; p < hw; ++p)
      out[c * hw + p] =
          data_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p));
  return out;
}

ViewPairBatch::ViewPairBatch(std::vector<ViewPair> instances)
    : instances_(std::move(instances)) {
  if (instances_.empty())
    fail(ErrorCode::InvalidInput, "batch needs at least one instance");
  const FeatureMap &ref = instances_.front().view_a;
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    if (!instances_[i].view_a.same_shape(ref) || !instances_[i].view_b.same_shape(ref))
      fail(ErrorCode::InvalidInput,
           "instance " + std::to_string(i) + " has a different (d, H, W)");
  }
}

std::size_t ViewPairBatch::dim() const noexcept {
  return instances_.empty() ? 0 : instances_.front().view_a.dim();
}
std::size_t ViewPairBatch::positions() const noexcept {
  return instances_.empty() ? 0 : instances_.front().view_a.positions();
}
std::size_t ViewPairBatch::height() const noexcept {
  return instances_.empty() ? 0 : instances_.front().view_a.height();
}
std::size_t ViewPairBatch::width() const noexcept {
  return instances_.empty() ? 0 : instances_.front().view_a.width();
}

bool ViewPairBatch::normalized() const noexcept {
  return std::all_of(instances_.begin(), instances_.end(), [](const ViewPair &v) {
    return v.view_a.normalized() && v.view_b.normalized();
  });
}

std::vector<FeatureMap> ViewPairBatch::view(int which) const {
  std::vector<FeatureMap> out;
  out.reserve(instances_.size());
  for (const auto &v : instances_)
    out.push_back(which == 0 ? v.view_a : v.view_b);
  return out;
}

FeatureMap l2_normalize(const FeatureMap &map, double epsilon) {
  if (!(epsilon > 0.0))
    fail(ErrorCode::InvalidParameter, "epsilon must be positive");
  require_finite(map.columns());
  FeatureMap out = map;
  Matrix &cols = out.columns();
  for (Eigen::Index p = 0; p < cols.cols(); ++p) {
    const double norm = cols.col(p).norm();
    cols.col(p) /= std::max(norm, epsilon);
  }
  out.set_normalized(true);
  return out;
}

InstanceVector l2_normalize(const InstanceVector &v, double epsilon) {
  if (!(epsilon > 0.0))
    fail(ErrorCode::InvalidParameter, "epsilon must be positive");
  if (!v.data.allFinite())
    fail(ErrorCode::InvalidInput, "instance vector contains non-finite values");
  return {v.data / std::max(v.data.norm(), epsilon), true};
}

ViewPairBatch l2_normalize(const ViewPairBatch &batch, double epsilon) {
  std::vector<ViewPair> out;
  out.reserve(batch.size());
  for (const auto &v : batch.instances())
    out.push_back({l2_normalize(v.view_a, epsilon), l2_normalize(v.view_b, epsilon)});
  return ViewPairBatch(std::move(out));
}

std::size_t count_degenerate_columns(const FeatureMap &map, double epsilon) {
  std::size_t n = 0;
  for (Eigen::Index p = 0; p < map.columns().cols(); ++p)
    if (map.columns().col(p).norm() <= epsilon)
      ++n;
  return n;
}

std::size_t count_degenerate_columns(const ViewPairBatch &batch, double epsilon) {
  std::size_t n = 0;
  for (const auto &v : batch.instances())
    n += count_degenerate_columns(v.view_a, epsilon) +
         count_degenerate_columns(v.view_b, epsilon);
  return n;
}

double cosine_sim(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    fail(ErrorCode::InvalidInput, "cosine_sim: length mismatch (" +
                                      std::to_string(x.size()) + " vs " +
                                      std::to_string(y.size()) + ")");
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    dot += x[k] * y[k];
    xx += x[k] * x[k];
    yy += y[k] * y[k];
  }
  if (xx == 0.0 || yy == 0.0)
    fail(ErrorCode::DegenerateInput, "cosine_sim: zero vector");
  const double s = dot / (std::sqrt(xx) * std::sqrt(yy));
  return std::clamp(s, -1.0, 1.0);
}

double cosine_sim(const Vector &x, const Vector &y) {
  return cosine_sim(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                    std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

double gaussian_potential(std::span<const double> x, std::span<const double> y, double t) {
  if (!(t > 0.0))
    fail(ErrorCode::InvalidParameter, "gaussian_potential: t must be positive");
  if (x.size() != y.size())
    fail(ErrorCode::InvalidInput, "gaussian_potential: length mismatch");
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x[k] - y[k];
    sq += diff * diff;
  }
  return std::exp(-t * sq);
}

double gaussian_potential(const Vector &x, const Vector &y, double t) {
  return gaussian_potential(
      std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
      std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), t);
}

Matrix pairwise_cos_matrix(const FeatureMap &a, const FeatureMap &b) {
  if (a.dim() != b.dim())
    fail(ErrorCode::InvalidInput, "pairwise_cos_matrix: feature dimension mismatch (" +
                                      std::to_string(a.dim()) + " vs " +
                                      std::to_string(b.dim()) + ")");
  const Matrix ua = a.normalized() ? a.columns() : l2_normalize(a).columns();
  const Matrix ub = b.normalized() ? b.columns() : l2_normalize(b).columns();
  Matrix out = ua.transpose() * ub;
  return out.cwiseMax(-1.0).cwiseMin(1.0);
}

} // namespace dcl
