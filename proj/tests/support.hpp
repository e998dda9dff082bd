#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "dcl/feature_core.hpp"
#include "dcl/losses.hpp"
#include "dcl/pair_assignment.hpp"

namespace testing_support {

using dcl::FeatureMap;
using dcl::Matrix;
using dcl::Vector;
using dcl::ViewPair;
using dcl::ViewPairBatch;

inline Matrix gaussian(std::mt19937_64 &rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      m(r, c) = n(rng);
  return m;
}

inline Matrix unit_columns(Matrix m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    m.col(c) /= m.col(c).norm();
  return m;
}

inline FeatureMap make_map(std::size_t h, std::size_t w, Matrix cols, bool unit) {
  FeatureMap m = FeatureMap::from_columns(h, w, unit ? unit_columns(std::move(cols)) : std::move(cols));
  m.set_normalized(unit);
  return m;
}

/// Random batch; view b is view a plus `noise`-scaled Gaussian perturbation
/// (noise < 0 draws view b independently).
inline ViewPairBatch random_batch(std::mt19937_64 &rng, std::size_t n, std::size_t h,
                                  std::size_t w, std::size_t d, bool unit = true,
                                  double noise = -1.0) {
  std::vector<ViewPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix a = gaussian(rng, d, h * w);
    Matrix b = noise < 0.0 ? gaussian(rng, d, h * w) : Matrix(a + noise * gaussian(rng, d, h * w));
    pairs.push_back({make_map(h, w, std::move(a), unit), make_map(h, w, std::move(b), unit)});
  }
  return ViewPairBatch(std::move(pairs));
}

inline double cos_loop(const Vector &x, const Vector &y) {
  double dot = 0, nx = 0, ny = 0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    dot += x(k) * y(k);
    nx += x(k) * x(k);
    ny += y(k) * y(k);
  }
  return dot / std::sqrt(nx * ny);
}

/// Feature (instance, view, position) of a batch.
inline Vector feature(const ViewPairBatch &b, std::size_t i, int v, std::size_t p) {
  return (v == 0 ? b[i].view_a : b[i].view_b).columns().col(static_cast<Eigen::Index>(p));
}

struct Terms {
  double value = 0.0;
  double alignment = 0.0;
  double distribution = 0.0;
};

/// Direct enumeration of the dense InfoNCE terms. Each anchor's
/// denominator is built from an explicit list of (instance, view, position)
/// triples following the assignment's negative policy.
inline Terms dense_oracle(const ViewPairBatch &b, const dcl::PairAssignment &pairs, double lambda,
                          bool include_positive) {
  struct A {
    std::size_t i;
    int v;
    std::size_t p;
    std::size_t q;
  };
  std::vector<A> anchors;
  for (const auto &pp : pairs.positives)
    anchors.push_back({pp.instance, 0, pp.anchor, pp.matched});
  if (pairs.symmetric)
    for (const auto &pp : pairs.positives)
      anchors.push_back({pp.instance, 1, pp.matched, pp.anchor});
  Terms t;
  for (const auto &a : anchors) {
    const Vector x = feature(b, a.i, a.v, a.p);
    const double pos = cos_loop(x, feature(b, a.i, 1 - a.v, a.q)) / lambda;
    std::vector<double> logits;
    if (include_positive)
      logits.push_back(pos);
    for (std::size_t k = 0; k < b.size(); ++k)
      for (int v = 0; v < 2; ++v)
        for (std::size_t q = 0; q < b.positions(); ++q) {
          if (k == a.i) {
            if (v == a.v)
              continue;  // own view, including the anchor itself
            if (q == a.q || !pairs.policy.same_pair_other_view)
              continue;
          } else if (!pairs.policy.cross_instance) {
            continue;
          }
          logits.push_back(cos_loop(x, feature(b, k, v, q)) / lambda);
        }
    double denom = 0.0;
    for (double l : logits)
      denom += std::exp(l);
    t.value += -std::log(std::exp(pos) / denom);
    t.alignment += -pos;
    t.distribution += std::log(denom);
  }
  const double count = static_cast<double>(anchors.size());
  t.value /= count;
  t.alignment /= count;
  t.distribution /= count;
  return t;
}

/// Instance InfoNCE by enumeration: 2N anchors, vector order a0 b0 a1 b1 ...
inline Terms instance_oracle(const std::vector<Vector> &z, double lambda, bool include_positive) {
  Terms t;
  const std::size_t m = z.size();
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t pos = (a % 2 == 0) ? a + 1 : a - 1;
    double denom = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == a || (k == pos && !include_positive))
        continue;
      denom += std::exp(cos_loop(z[a], z[k]) / lambda);
    }
    const double s = cos_loop(z[a], z[pos]) / lambda;
    t.value += -std::log(std::exp(s) / denom);
    t.alignment += -s;
    t.distribution += std::log(denom);
  }
  t.value /= static_cast<double>(m);
  t.alignment /= static_cast<double>(m);
  t.distribution /= static_cast<double>(m);
  return t;
}

/// log mean exp(-t |x - y|^2) over all pairs of columns from different maps.
inline double uniformity_oracle(const std::vector<FeatureMap> &maps, double t) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < maps.size(); ++i)
    for (std::size_t k = i + 1; k < maps.size(); ++k)
      for (std::size_t p = 0; p < maps[i].positions(); ++p)
        for (std::size_t q = 0; q < maps[k].positions(); ++q) {
          const Vector diff = Vector(maps[i].column(p)) - Vector(maps[k].column(q));
          double sq = 0.0;
          for (Eigen::Index c = 0; c < diff.size(); ++c)
            sq += diff(c) * diff(c);
          total += std::exp(-t * sq);
          ++count;
        }
  return std::log(total / static_cast<double>(count));
}

/// Central differences of f with respect to every coordinate of the batch.
inline ViewPairBatch finite_difference(const ViewPairBatch &batch,
                                       const std::function<double(const ViewPairBatch &)> &f,
                                       double step = 1e-5) {
  ViewPairBatch grad = batch;
  ViewPairBatch probe = batch;
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (int v = 0; v < 2; ++v) {
      Matrix &x = (v == 0 ? probe[i].view_a : probe[i].view_b).columns();
      Matrix &g = (v == 0 ? grad[i].view_a : grad[i].view_b).columns();
      for (Eigen::Index c = 0; c < x.cols(); ++c)
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          const double keep = x(r, c);
          x(r, c) = keep + step;
          const double up = f(probe);
          x(r, c) = keep - step;
          const double down = f(probe);
          x(r, c) = keep;
          g(r, c) = (up - down) / (2.0 * step);
        }
    }
  return grad;
}

/// Largest per-coordinate error of `analytic` against `numeric`, relative
/// to max(|numeric|, 1e-2 * |numeric|_inf).
inline double gradient_relative_error(const ViewPairBatch &analytic, const ViewPairBatch &numeric) {
  double scale = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i)
    scale = std::max({scale, numeric[i].view_a.columns().cwiseAbs().maxCoeff(),
                      numeric[i].view_b.columns().cwiseAbs().maxCoeff()});
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i)
    for (int v = 0; v < 2; ++v) {
      const Matrix &a = (v == 0 ? analytic[i].view_a : analytic[i].view_b).columns();
      const Matrix &n = (v == 0 ? numeric[i].view_a : numeric[i].view_b).columns();
      for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double denom = std::max({std::abs(n(k)), 1e-2 * scale, 1e-12});
        worst = std::max(worst, std::abs(a(k) - n(k)) / denom);
      }
    }
  return worst;
}

struct PairCounts {
  std::uint64_t p = 0, q = 0, t = 0, u = 0, both = 0;
  double tau = std::numeric_limits<double>::quiet_NaN();
};

/// O(n^2) pair enumeration with the tau-b conventions.
inline PairCounts brute_kendall(const std::vector<double> &x, const std::vector<double> &y) {
  PairCounts c;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const bool tx = x[i] == x[j], ty = y[i] == y[j];
      if (tx && ty)
        ++c.both;
      else if (tx)
        ++c.t;
      else if (ty)
        ++c.u;
      else if ((x[i] < x[j]) == (y[i] < y[j]))
        ++c.p;
      else
        ++c.q;
    }
  const double a = static_cast<double>(c.p + c.q + c.t), b = static_cast<double>(c.p + c.q + c.u);
  if (a > 0 && b > 0)
    c.tau = (static_cast<double>(c.p) - static_cast<double>(c.q)) / std::sqrt(a * b);
  return c;
}

/// Entropic OT by alternating row and column rescaling of the Gibbs kernel
/// exp(-cost / reg), without any shift.
inline Matrix sinkhorn_oracle(const Matrix &cost, const Vector &r, const Vector &c, double reg,
                              int iterations) {
  Matrix p = (-cost.array() / reg).exp().matrix();
  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      p.row(i) *= r(i) / p.row(i).sum();
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      p.col(j) *= c(j) / p.col(j).sum();
  }
  return p;
}

} // namespace testing_support
