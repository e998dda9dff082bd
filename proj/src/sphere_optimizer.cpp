#include "dcl/sphere_optimizer.hpp"

#include <cmath>
#include <random>

#include "dcl/error.hpp"
#include "dcl/matching.hpp"
#include "dcl/serialize.hpp"

namespace dcl {

namespace {

Matrix gaussian_columns(std::size_t d, std::size_t n, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      m(r, c) = normal(rng);
  return m;
}

void normalize_columns(Matrix &m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double norm = m.col(c).norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      fail(ErrorCode::NumericalDegeneracy, "embedding column " + std::to_string(c) +
                                               " cannot be projected onto the sphere");
    m.col(c) /= norm;
  }
}

HistoryEntry measure(const ViewPairBatch &batch, std::size_t step, const LossWeights &weights,
                     const LossConfig &cfg, ContrastiveVariant variant,
                     const PairAssignment *pairs) {
  LossConfig sq = cfg;
  sq.alignment = AlignmentConvention::SqDistance;
  HistoryEntry e;
  e.step = step;
  e.l_a = alignment_loss(batch, sq);
  e.l_u = uniformity_loss(batch, cfg);
  e.loss = combined_loss(batch, weights, cfg, pairs, variant, false).value;
  return e;
}

} // namespace

OptimState init_random(std::size_t n, std::size_t hw, std::size_t d, std::uint64_t seed,
                       double noise, double lr) {
  if (n < 2)
    fail(ErrorCode::InvalidParameter, "at least two instances are needed");
  if (hw == 0)
    fail(ErrorCode::InvalidParameter, "at least one position is needed");
  if (d < 2)
    fail(ErrorCode::InvalidParameter, "embedding dimension must be at least 2");
  if (!(noise >= 0.0) || !std::isfinite(noise))
    fail(ErrorCode::InvalidParameter, "view noise must be finite and non-negative");
  if (!(lr > 0.0) || !std::isfinite(lr))
    fail(ErrorCode::InvalidParameter, "learning rate must be finite and positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, noise > 0.0 ? noise : 1.0);
  std::vector<ViewPair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix a = gaussian_columns(d, hw, rng);
    normalize_columns(a);
    Matrix b = a;
    if (noise > 0.0) {
      for (Eigen::Index c = 0; c < b.cols(); ++c)
        for (Eigen::Index r = 0; r < b.rows(); ++r)
          b(r, c) += normal(rng);
      normalize_columns(b);
    }
    ViewPair vp{FeatureMap::from_columns(hw, 1, std::move(a)),
                FeatureMap::from_columns(hw, 1, std::move(b))};
    vp.view_a.set_normalized(true);
    vp.view_b.set_normalized(true);
    pairs.push_back(std::move(vp));
  }
  OptimState state{ViewPairBatch(std::move(pairs)), 0, lr, {}};
  return state;
}

OptimState run(OptimState state, std::size_t steps, const LossWeights &weights,
               const LossConfig &cfg, ContrastiveVariant variant) {
  cfg.validate();
  if (steps == 0)
    fail(ErrorCode::InvalidParameter, "steps must be at least 1");
  if (!(state.lr > 0.0) || !std::isfinite(state.lr))
    fail(ErrorCode::InvalidParameter, "learning rate must be finite and positive");
  std::optional<PairAssignment> pairs;
  if (weights.contrastive > 0.0 && variant == ContrastiveVariant::Dense)
    pairs = index_wise_pairs(state.embeddings);
  const PairAssignment *pp = pairs ? &*pairs : nullptr;

  if (state.history.empty())
    state.history.push_back(measure(state.embeddings, state.step, weights, cfg, variant, pp));

  for (std::size_t s = 0; s < steps; ++s) {
    const LossReport r = combined_loss(state.embeddings, weights, cfg, pp, variant, true);
    ViewPairBatch &emb = state.embeddings;
    for (std::size_t i = 0; i < emb.size(); ++i) {
      for (int v = 0; v < 2; ++v) {
        FeatureMap &map = v == 0 ? emb[i].view_a : emb[i].view_b;
        const FeatureMap &g = v == 0 ? (*r.gradient)[i].view_a : (*r.gradient)[i].view_b;
        Matrix next = map.columns() - state.lr * g.columns();
        if (!next.allFinite())
          fail(ErrorCode::Divergence,
               "non-finite embedding at step " + std::to_string(state.step + 1));
        try {
          normalize_columns(next);
        } catch (const Error &) {
          fail(ErrorCode::Divergence,
               "embedding collapsed to zero at step " + std::to_string(state.step + 1));
        }
        map.columns() = std::move(next);
        map.set_normalized(true);
      }
    }
    ++state.step;
    HistoryEntry e = measure(emb, state.step, weights, cfg, variant, pp);
    if (!std::isfinite(e.loss))
      fail(ErrorCode::Divergence, "non-finite loss at step " + std::to_string(state.step));
    state.history.push_back(e);
  }
  return state;
}

double mean_positive_cosine(const ViewPairBatch &batch) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto &vp : batch.instances()) {
    for (std::size_t p = 0; p < vp.view_a.positions(); ++p) {
      const Vector a = vp.view_a.column(p), b = vp.view_b.column(p);
      total += cosine_sim(a, b);
      ++count;
    }
  }
  if (count == 0)
    fail(ErrorCode::InvalidInput, "empty batch");
  return total / static_cast<double>(count);
}

std::string history_csv(const std::vector<HistoryEntry> &history) {
  CsvDocument doc;
  doc.header = {"step", "l_a", "l_u", "loss"};
  for (const auto &e : history)
    doc.rows.push_back({std::to_string(e.step), format_double(e.l_a), format_double(e.l_u),
                        format_double(e.loss)});
  return doc.format();
}

} // namespace dcl
