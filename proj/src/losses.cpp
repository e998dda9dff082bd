#include "dcl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dcl/parallel.hpp"

namespace dcl {

const char *alignment_name(AlignmentConvention c) noexcept {
  return c == AlignmentConvention::NegCosine ? "neg-cosine" : "sq-distance";
}

const char *uniformity_scope_name(UniformityScope s) noexcept {
  return s == UniformityScope::PositivePairsLiteral ? "literal" : "all-pairs";
}

AlignmentConvention parse_alignment(std::string_view name) {
  if (name == "neg-cosine" || name == "neg_cosine")
    return AlignmentConvention::NegCosine;
  if (name == "sq-distance" || name == "sq_distance")
    return AlignmentConvention::SqDistance;
  fail(ErrorCode::InvalidParameter, "unknown alignment convention '" + std::string(name) + "'");
}

UniformityScope parse_uniformity_scope(std::string_view name) {
  if (name == "literal" || name == "positive_pairs_literal")
    return UniformityScope::PositivePairsLiteral;
  if (name == "all-pairs" || name == "inter_instance_all_pairs")
    return UniformityScope::InterInstanceAllPairs;
  fail(ErrorCode::InvalidParameter, "unknown uniformity scope '" + std::string(name) + "'");
}

void LossConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    fail(ErrorCode::InvalidParameter, "temperature must be positive");
  if (!(kernel_t > 0.0) || !std::isfinite(kernel_t))
    fail(ErrorCode::InvalidParameter, "kernel_t must be positive");
  if (pair_subsample && *pair_subsample < 2)
    fail(ErrorCode::InvalidParameter, "pair_subsample must be at least 2");
}

namespace {

using Index = Eigen::Index;

/// All vectors of a batch as columns, ordered (instance, view, position).
struct Stacked {
  std::size_t n = 0, hw = 0, d = 0;
  Matrix raw;     // d x M
  Matrix unit;    // raw columns scaled to unit norm (zero columns stay zero)
  Vector inv;     // 1 / norm, 0 for zero columns

  explicit Stacked(const ViewPairBatch &batch)
      : n(batch.size()), hw(batch.positions()), d(batch.dim()) {
    const Index m = static_cast<Index>(2 * n * hw);
    raw.resize(static_cast<Index>(d), m);
    for (std::size_t i = 0; i < n; ++i) {
      raw.middleCols(index(i, 0, 0), static_cast<Index>(hw)) = batch[i].view_a.columns();
      raw.middleCols(index(i, 1, 0), static_cast<Index>(hw)) = batch[i].view_b.columns();
    }
    inv.resize(m);
    unit = raw;
    for (Index k = 0; k < m; ++k) {
      const double norm = raw.col(k).norm();
      inv(k) = norm > 0.0 ? 1.0 / norm : 0.0;
      unit.col(k) *= inv(k);
    }
  }

  Index index(std::size_t i, int view, std::size_t p) const {
    return static_cast<Index>((2 * i + static_cast<std::size_t>(view)) * hw + p);
  }
  Index size() const { return raw.cols(); }
};

ViewPairBatch unstack(const Matrix &g, const ViewPairBatch &like) {
  std::vector<ViewPair> out;
  out.reserve(like.size());
  const Index hw = static_cast<Index>(like.positions());
  for (std::size_t i = 0; i < like.size(); ++i) {
    const Index base = static_cast<Index>(2 * i) * hw;
    out.push_back({FeatureMap::from_columns(like.height(), like.width(), g.middleCols(base, hw)),
                   FeatureMap::from_columns(like.height(), like.width(),
                                            g.middleCols(base + hw, hw))});
  }
  return ViewPairBatch(std::move(out));
}

struct Anchor {
  Index self;
  Index positive;
  std::size_t instance;
  int view;
};

std::vector<Anchor> dense_anchors(const Stacked &s, const PairAssignment &pairs) {
  std::vector<Anchor> anchors;
  anchors.reserve(pairs.positives.size() * (pairs.symmetric ? 2 : 1));
  for (const auto &pp : pairs.positives)
    anchors.push_back({s.index(pp.instance, 0, pp.anchor), s.index(pp.instance, 1, pp.matched),
                       pp.instance, 0});
  if (pairs.symmetric)
    for (const auto &pp : pairs.positives)
      anchors.push_back({s.index(pp.instance, 1, pp.matched),
                         s.index(pp.instance, 0, pp.anchor), pp.instance, 1});
  return anchors;
}

/// Whether column k belongs to the denominator of anchor a.
bool in_denominator(const Stacked &s, const Anchor &a, Index k, const NegativePolicy &policy,
                    bool include_positive) {
  if (k == a.self)
    return false;
  if (k == a.positive)
    return include_positive;
  const std::size_t inst = static_cast<std::size_t>(k) / (2 * s.hw);
  const int view = static_cast<int>((static_cast<std::size_t>(k) / s.hw) % 2);
  if (inst != a.instance)
    return policy.cross_instance;
  if (view == a.view)
    return !policy.exclude_own_view;
  return policy.same_pair_other_view;
}

} // namespace

LossReport dense_info_nce(const ViewPairBatch &batch, const PairAssignment &pairs,
                          const LossConfig &cfg, bool with_gradient) {
  cfg.validate();
  pairs.check_against(batch);
  const bool include_positive = cfg.include_positive_for_dense();
  if (pairs.negatives_per_anchor() == 0)
    fail(ErrorCode::InsufficientBatch,
         "dense InfoNCE: the negative set is empty (N = " + std::to_string(batch.size()) +
             ", HW = " + std::to_string(batch.positions()) + ")");

  const Stacked s(batch);
  const auto anchors = dense_anchors(s, pairs);
  const Index m = s.size();
  const double inv_t = 1.0 / cfg.temperature;
  const std::size_t count = anchors.size();

  std::vector<double> align(count), dist(count);
  // Row a of coeff holds d(loss_a)/d(sim(a, k)) when gradients are wanted.
  Matrix coeff, sims;
  if (with_gradient) {
    coeff = Matrix::Zero(static_cast<Index>(count), m);
    sims = Matrix::Zero(static_cast<Index>(count), m);
  }

  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    Vector row(m);
    std::vector<Index> members;
    for (std::size_t a = begin; a < end; ++a) {
      const Anchor &anc = anchors[a];
      row.noalias() = s.unit.transpose() * s.unit.col(anc.self);
      members.clear();
      double top = -std::numeric_limits<double>::infinity();
      for (Index k = 0; k < m; ++k) {
        if (in_denominator(s, anc, k, pairs.policy, include_positive)) {
          members.push_back(k);
          top = std::max(top, row(k) * inv_t);
        }
      }
      double total = 0.0;
      for (Index k : members)
        total += std::exp(row(k) * inv_t - top);
      const double lse = top + std::log(total);
      align[a] = -row(anc.positive) * inv_t;
      dist[a] = lse;
      if (with_gradient) {
        const Index r = static_cast<Index>(a);
        for (Index k : members)
          coeff(r, k) = std::exp(row(k) * inv_t - top) / total * inv_t;
        coeff(r, anc.positive) -= inv_t;
        sims.row(r) = row.transpose();
      }
    }
  });

  LossReport report;
  for (std::size_t a = 0; a < count; ++a) {
    report.alignment_term += align[a];
    report.distribution_term += dist[a];
  }
  report.alignment_term /= static_cast<double>(count);
  report.distribution_term /= static_cast<double>(count);
  report.value = report.alignment_term + report.distribution_term;

  if (with_gradient) {
    // Scatter anchor rows into an M x M coefficient matrix C, then
    // dL/dx = [U (C + C^T) - U diag(rowsum(C.S) + colsum(C.S))] diag(inv) / A.
    Matrix full = Matrix::Zero(m, m);
    Matrix weighted = Matrix::Zero(m, m);
    for (std::size_t a = 0; a < count; ++a) {
      const Index r = static_cast<Index>(a);
      full.row(anchors[a].self) += coeff.row(r);
      weighted.row(anchors[a].self) += coeff.row(r).cwiseProduct(sims.row(r));
    }
    const Vector diag = weighted.rowwise().sum() + weighted.colwise().sum().transpose();
    Matrix g = s.unit * (full + full.transpose());
    g -= s.unit * diag.asDiagonal();
    g = g * s.inv.asDiagonal();
    g /= static_cast<double>(count);
    report.gradient = unstack(g, batch);
  }
  return report;
}

LossReport instance_info_nce(std::span<const InstancePair> pairs, const LossConfig &cfg,
                             bool with_gradient) {
  cfg.validate();
  const std::size_t n = pairs.size();
  if (n < 2)
    fail(ErrorCode::InsufficientBatch,
         "instance InfoNCE needs at least 2 instances, got " + std::to_string(n));
  const std::size_t dim = static_cast<std::size_t>(pairs[0].a.data.size());
  std::vector<const Vector *> z(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<std::size_t>(pairs[i].a.data.size()) != dim ||
        static_cast<std::size_t>(pairs[i].b.data.size()) != dim)
      fail(ErrorCode::InvalidInput, "instance vectors differ in length");
    z[2 * i] = &pairs[i].a.data;
    z[2 * i + 1] = &pairs[i].b.data;
  }
  const bool include_positive = cfg.include_positive_for_instance();
  const double inv_t = 1.0 / cfg.temperature;
  const std::size_t m = 2 * n;

  std::vector<double> norm(m);
  for (std::size_t k = 0; k < m; ++k) {
    norm[k] = z[k]->norm();
    if (norm[k] == 0.0)
      fail(ErrorCode::DegenerateInput, "instance vector " + std::to_string(k) + " is zero");
  }
  auto sim = [&](std::size_t x, std::size_t y) {
    return z[x]->dot(*z[y]) / (norm[x] * norm[y]);
  };
  // d sim(x, y) / d z_x
  auto dsim = [&](std::size_t x, std::size_t y, double s) -> Vector {
    return (*z[y] / norm[y] - s * *z[x] / norm[x]) / norm[x];
  };

  LossReport report;
  std::vector<Vector> grad;
  if (with_gradient)
    grad.assign(m, Vector::Zero(static_cast<Index>(dim)));

  std::vector<double> logits(m);
  for (std::size_t anchor = 0; anchor < m; ++anchor) {
    const std::size_t positive = anchor ^ 1u;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      logits[k] = sim(anchor, k) * inv_t;
      if (k != anchor && (include_positive || k != positive))
        top = std::max(top, logits[k]);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      if (k != anchor && (include_positive || k != positive))
        total += std::exp(logits[k] - top);
    report.alignment_term += -logits[positive];
    report.distribution_term += top + std::log(total);

    if (with_gradient) {
      for (std::size_t k = 0; k < m; ++k) {
        if (k == anchor || (!include_positive && k == positive))
          continue;
        const double w = std::exp(logits[k] - top) / total * inv_t;
        const double s = logits[k] / inv_t;
        grad[anchor] += w * dsim(anchor, k, s);
        grad[k] += w * dsim(k, anchor, s);
      }
      const double s = logits[positive] / inv_t;
      grad[anchor] -= inv_t * dsim(anchor, positive, s);
      grad[positive] -= inv_t * dsim(positive, anchor, s);
    }
  }
  report.alignment_term /= static_cast<double>(m);
  report.distribution_term /= static_cast<double>(m);
  report.value = report.alignment_term + report.distribution_term;

  if (with_gradient) {
    std::vector<ViewPair> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back({FeatureMap::from_columns(1, 1, grad[2 * i] / static_cast<double>(m)),
                     FeatureMap::from_columns(1, 1, grad[2 * i + 1] / static_cast<double>(m))});
    report.gradient = ViewPairBatch(std::move(out));
  }
  return report;
}

double alignment_loss(const ViewPairBatch &batch, const LossConfig &cfg) {
  if (batch.size() == 0)
    fail(ErrorCode::InvalidInput, "alignment_loss: empty batch");
  double total = 0.0;
  for (const auto &v : batch.instances()) {
    const Matrix &a = v.view_a.columns();
    const Matrix &b = v.view_b.columns();
    for (Index p = 0; p < a.cols(); ++p) {
      if (cfg.alignment == AlignmentConvention::SqDistance) {
        total += (a.col(p) - b.col(p)).squaredNorm();
      } else {
        const double na = a.col(p).norm(), nb = b.col(p).norm();
        total -= (na > 0.0 && nb > 0.0) ? a.col(p).dot(b.col(p)) / (na * nb) : 0.0;
      }
    }
  }
  return total / static_cast<double>(batch.size() * batch.positions());
}

namespace {

ViewPairBatch alignment_gradient(const ViewPairBatch &batch, const LossConfig &cfg) {
  const double scale = 1.0 / static_cast<double>(batch.size() * batch.positions());
  std::vector<ViewPair> out;
  out.reserve(batch.size());
  for (const auto &v : batch.instances()) {
    const Matrix &a = v.view_a.columns();
    const Matrix &b = v.view_b.columns();
    Matrix ga(a.rows(), a.cols()), gb(b.rows(), b.cols());
    for (Index p = 0; p < a.cols(); ++p) {
      if (cfg.alignment == AlignmentConvention::SqDistance) {
        ga.col(p) = 2.0 * scale * (a.col(p) - b.col(p));
        gb.col(p) = -ga.col(p);
      } else {
        const double na = a.col(p).norm(), nb = b.col(p).norm();
        if (na == 0.0 || nb == 0.0) {
          ga.col(p).setZero();
          gb.col(p).setZero();
          continue;
        }
        const Vector ua = a.col(p) / na, ub = b.col(p) / nb;
        const double s = ua.dot(ub);
        ga.col(p) = -scale * (ub - s * ua) / na;
        gb.col(p) = -scale * (ua - s * ub) / nb;
      }
    }
    out.push_back({FeatureMap::from_columns(batch.height(), batch.width(), std::move(ga)),
                   FeatureMap::from_columns(batch.height(), batch.width(), std::move(gb))});
  }
  return ViewPairBatch(std::move(out));
}

struct PairIndex {
  Index x;
  Index y;
};

/// Uniformity pair set over the columns of `cols`, grouped in blocks of
/// `block` columns (one block per instance). Pairs join different blocks.
std::vector<PairIndex> inter_block_pairs(std::size_t blocks, std::size_t block,
                                         const LossConfig &cfg) {
  const std::uint64_t block_pairs = blocks * (blocks - 1) / 2;
  const std::uint64_t per = static_cast<std::uint64_t>(block) * block;
  const std::uint64_t total = block_pairs * per;
  if (total == 0)
    fail(ErrorCode::InsufficientInput,
         "uniformity needs features from at least 2 instances");

  // first_of[i] = number of block pairs whose first block is < i
  std::vector<std::uint64_t> first_of(blocks + 1, 0);
  for (std::size_t i = 0; i < blocks; ++i)
    first_of[i + 1] = first_of[i] + (blocks - 1 - i);
  auto decode = [&](std::uint64_t t) {
    const std::uint64_t bp = t / per, rem = t % per;
    const auto it = std::upper_bound(first_of.begin(), first_of.end(), bp);
    const std::size_t i = static_cast<std::size_t>(it - first_of.begin()) - 1;
    const std::size_t k = i + 1 + static_cast<std::size_t>(bp - first_of[i]);
    return PairIndex{static_cast<Index>(i * block + rem / block),
                     static_cast<Index>(k * block + rem % block)};
  };

  std::vector<PairIndex> pairs;
  if (cfg.pair_subsample && total > *cfg.pair_subsample) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
    pairs.reserve(*cfg.pair_subsample);
    for (std::uint64_t s = 0; s < *cfg.pair_subsample; ++s)
      pairs.push_back(decode(pick(rng)));
  } else {
    pairs.reserve(total);
    for (std::uint64_t t = 0; t < total; ++t)
      pairs.push_back(decode(t));
  }
  return pairs;
}

/// log mean exp(-t |x - y|^2) over the given column pairs, and optionally
/// its gradient with respect to every column.
double log_mean_potential(const Matrix &cols, const std::vector<PairIndex> &pairs, double t,
                          Matrix *grad) {
  const std::size_t count = pairs.size();
  std::vector<double> expo(count);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k)
      expo[k] = -t * (cols.col(pairs[k].x) - cols.col(pairs[k].y)).squaredNorm();
  });
  double top = -std::numeric_limits<double>::infinity();
  for (double e : expo)
    top = std::max(top, e);
  double total = 0.0;
  for (double e : expo)
    total += std::exp(e - top);
  if (grad) {
    grad->setZero(cols.rows(), cols.cols());
    for (std::size_t k = 0; k < count; ++k) {
      const double w = std::exp(expo[k] - top) / total;
      const Vector diff = cols.col(pairs[k].x) - cols.col(pairs[k].y);
      grad->col(pairs[k].x) += -2.0 * t * w * diff;
      grad->col(pairs[k].y) += 2.0 * t * w * diff;
    }
  }
  return top + std::log(total) - std::log(static_cast<double>(count));
}

Matrix stack_maps(std::span<const FeatureMap> maps) {
  const Index hw = static_cast<Index>(maps[0].positions());
  Matrix cols(static_cast<Index>(maps[0].dim()), hw * static_cast<Index>(maps.size()));
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (!maps[i].same_shape(maps[0]))
      fail(ErrorCode::InvalidInput, "uniformity: feature maps differ in shape");
    cols.middleCols(static_cast<Index>(i) * hw, hw) = maps[i].columns();
  }
  return cols;
}

double all_pairs_uniformity(std::span<const FeatureMap> maps, const LossConfig &cfg,
                            Matrix *grad) {
  if (maps.empty())
    fail(ErrorCode::InsufficientInput, "uniformity: no features");
  const Matrix cols = stack_maps(maps);
  const auto pairs = inter_block_pairs(maps.size(), maps[0].positions(), cfg);
  return log_mean_potential(cols, pairs, cfg.kernel_t, grad);
}

double literal_uniformity(const ViewPairBatch &batch, const LossConfig &cfg,
                          ViewPairBatch *grad) {
  const Stacked s(batch);
  std::vector<PairIndex> pairs;
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t p = 0; p < s.hw; ++p)
      pairs.push_back({s.index(i, 0, p), s.index(i, 1, p)});
  Matrix g;
  const double value = log_mean_potential(s.raw, pairs, cfg.kernel_t, grad ? &g : nullptr);
  if (grad)
    *grad = unstack(g, batch);
  return value;
}

double batch_uniformity(const ViewPairBatch &batch, const LossConfig &cfg,
                        ViewPairBatch *grad) {
  cfg.validate();
  if (cfg.uniformity == UniformityScope::PositivePairsLiteral)
    return literal_uniformity(batch, cfg, grad);
  const auto a = batch.view(0), b = batch.view(1);
  Matrix ga, gb;
  const double value = 0.5 * (all_pairs_uniformity(a, cfg, grad ? &ga : nullptr) +
                              all_pairs_uniformity(b, cfg, grad ? &gb : nullptr));
  if (grad) {
    const Index hw = static_cast<Index>(batch.positions());
    std::vector<ViewPair> out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Index base = static_cast<Index>(i) * hw;
      out.push_back({FeatureMap::from_columns(batch.height(), batch.width(),
                                              0.5 * ga.middleCols(base, hw)),
                     FeatureMap::from_columns(batch.height(), batch.width(),
                                              0.5 * gb.middleCols(base, hw))});
    }
    *grad = ViewPairBatch(std::move(out));
  }
  return value;
}

} // namespace

double uniformity_loss(std::span<const FeatureMap> features, const LossConfig &cfg) {
  cfg.validate();
  if (cfg.uniformity == UniformityScope::PositivePairsLiteral)
    fail(ErrorCode::InvalidParameter,
         "the literal uniformity scope needs view pairs; pass a ViewPairBatch");
  return all_pairs_uniformity(features, cfg, nullptr);
}

double uniformity_loss(const ViewPairBatch &batch, const LossConfig &cfg) {
  return batch_uniformity(batch, cfg, nullptr);
}

std::vector<InstancePair> pool_instances(const ViewPairBatch &batch) {
  std::vector<InstancePair> out;
  out.reserve(batch.size());
  for (const auto &v : batch.instances()) {
    InstanceVector a{v.view_a.columns().rowwise().mean(), false};
    InstanceVector b{v.view_b.columns().rowwise().mean(), false};
    out.push_back({l2_normalize(a), l2_normalize(b)});
  }
  return out;
}

namespace {

/// Instance InfoNCE on pooled features, with the gradient spread back over
/// the dense positions. Cosine similarity ignores scale, so the raw means
/// give the same value as their normalized versions.
LossReport pooled_info_nce(const ViewPairBatch &batch, const LossConfig &cfg,
                           bool with_gradient) {
  std::vector<InstancePair> means;
  means.reserve(batch.size());
  for (const auto &v : batch.instances())
    means.push_back({{v.view_a.columns().rowwise().mean(), false},
                     {v.view_b.columns().rowwise().mean(), false}});
  LossReport report = instance_info_nce(means, cfg, with_gradient);
  if (with_gradient) {
    const Index hw = static_cast<Index>(batch.positions());
    std::vector<ViewPair> out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Vector ga = (*report.gradient)[i].view_a.columns().col(0) / static_cast<double>(hw);
      const Vector gb = (*report.gradient)[i].view_b.columns().col(0) / static_cast<double>(hw);
      out.push_back({FeatureMap::from_columns(batch.height(), batch.width(), ga.replicate(1, hw)),
                     FeatureMap::from_columns(batch.height(), batch.width(), gb.replicate(1, hw))});
    }
    report.gradient = ViewPairBatch(std::move(out));
  }
  return report;
}

void accumulate(ViewPairBatch &into, const ViewPairBatch &add, double w) {
  for (std::size_t i = 0; i < into.size(); ++i) {
    into[i].view_a.columns() += w * add[i].view_a.columns();
    into[i].view_b.columns() += w * add[i].view_b.columns();
  }
}

ViewPairBatch zeros_like(const ViewPairBatch &batch) {
  std::vector<ViewPair> out;
  for (std::size_t i = 0; i < batch.size(); ++i)
    out.push_back({FeatureMap(batch.dim(), batch.height(), batch.width()),
                   FeatureMap(batch.dim(), batch.height(), batch.width())});
  return ViewPairBatch(std::move(out));
}

} // namespace

LossReport combined_loss(const ViewPairBatch &batch, const LossWeights &weights,
                         const LossConfig &cfg, const PairAssignment *pairs,
                         ContrastiveVariant variant, bool with_gradient) {
  cfg.validate();
  const double ws[] = {weights.alignment, weights.uniformity, weights.contrastive};
  for (double w : ws)
    if (!(w >= 0.0) || !std::isfinite(w))
      fail(ErrorCode::InvalidParameter, "loss weights must be finite and non-negative");
  if (weights.alignment == 0.0 && weights.uniformity == 0.0 && weights.contrastive == 0.0)
    fail(ErrorCode::InvalidParameter, "at least one loss weight must be positive");

  LossReport report;
  if (with_gradient)
    report.gradient = zeros_like(batch);

  if (weights.alignment > 0.0) {
    const double la = alignment_loss(batch, cfg);
    report.alignment_term += weights.alignment * la;
    if (with_gradient)
      accumulate(*report.gradient, alignment_gradient(batch, cfg), weights.alignment);
  }
  if (weights.uniformity > 0.0) {
    ViewPairBatch g;
    const double lu = batch_uniformity(batch, cfg, with_gradient ? &g : nullptr);
    report.distribution_term += weights.uniformity * lu;
    if (with_gradient)
      accumulate(*report.gradient, g, weights.uniformity);
  }
  if (weights.contrastive > 0.0) {
    LossReport c;
    if (variant == ContrastiveVariant::Dense) {
      if (!pairs)
        fail(ErrorCode::InvalidState, "dense contrastive term requested without a pair assignment");
      c = dense_info_nce(batch, *pairs, cfg, with_gradient);
    } else {
      c = pooled_info_nce(batch, cfg, with_gradient);
    }
    report.alignment_term += weights.contrastive * c.alignment_term;
    report.distribution_term += weights.contrastive * c.distribution_term;
    if (with_gradient)
      accumulate(*report.gradient, *c.gradient, weights.contrastive);
  }
  report.value = report.alignment_term + report.distribution_term;
  return report;
}

namespace {

LossReport evaluate(const ViewPairBatch &batch, const LossSelector &which,
                    const LossConfig &cfg, bool with_gradient) {
  using Kind = LossSelector::Kind;
  switch (which.kind) {
  case Kind::Alignment:
    return combined_loss(batch, {1.0, 0.0, 0.0}, cfg, nullptr, which.variant, with_gradient);
  case Kind::Uniformity:
    return combined_loss(batch, {0.0, 1.0, 0.0}, cfg, nullptr, which.variant, with_gradient);
  case Kind::DenseInfoNce:
    if (!which.pairs)
      fail(ErrorCode::InvalidState, "dense InfoNCE selected but no matching was computed");
    return dense_info_nce(batch, *which.pairs, cfg, with_gradient);
  case Kind::InstanceInfoNce:
    return pooled_info_nce(batch, cfg, with_gradient);
  case Kind::Combined:
    return combined_loss(batch, which.weights, cfg, which.pairs, which.variant, with_gradient);
  }
  fail(ErrorCode::InvalidParameter, "unknown loss selector");
}

} // namespace

ViewPairBatch loss_gradient(const ViewPairBatch &batch, const LossSelector &which,
                            const LossConfig &cfg) {
  return *evaluate(batch, which, cfg, true).gradient;
}

double loss_value(const ViewPairBatch &batch, const LossSelector &which,
                  const LossConfig &cfg) {
  return evaluate(batch, which, cfg, false).value;
}

} // namespace dcl
