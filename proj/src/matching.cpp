#include "dcl/matching.hpp"

#include <cmath>
#include <string>

#include "dcl/parallel.hpp"

namespace dcl {

using Index = Eigen::Index;

PairAssignment index_wise_pairs(const ViewPairBatch &batch) {
  PairAssignment out;
  out.strategy = MatchingStrategy::IndexWise;
  out.instances = batch.size();
  out.positions = batch.positions();
  out.symmetric = true;
  out.positives.reserve(out.instances * out.positions);
  for (std::size_t i = 0; i < out.instances; ++i)
    for (std::size_t p = 0; p < out.positions; ++p)
      out.positives.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(p),
                               static_cast<std::uint32_t>(p)});
  return out;
}

namespace {

/// First index of the row maximum.
std::uint32_t row_argmax(const Matrix &m, Index row) {
  Index best = 0;
  for (Index q = 1; q < m.cols(); ++q)
    if (m(row, q) > m(row, best))
      best = q;
  return static_cast<std::uint32_t>(best);
}

PairAssignment one_directional(const ViewPairBatch &batch, MatchingStrategy strategy) {
  PairAssignment out;
  out.strategy = strategy;
  out.instances = batch.size();
  out.positions = batch.positions();
  out.symmetric = false;
  out.policy.same_pair_other_view = false;
  return out;
}

} // namespace

PairAssignment cosine_argmax_pairs(const ViewPairBatch &batch) {
  PairAssignment out = one_directional(batch, MatchingStrategy::CosineArgmax);
  std::vector<Matrix> sims(batch.size());
  parallel_for(batch.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      sims[i] = pairwise_cos_matrix(batch[i].view_a, batch[i].view_b);
  });
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (std::size_t p = 0; p < out.positions; ++p)
      out.positives.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(p),
                               row_argmax(sims[i], static_cast<Index>(p))});
  return out;
}

Matrix cost_map(const FeatureMap &a, const FeatureMap &b) {
  Matrix cos = pairwise_cos_matrix(a, b);
  return (1.0 - cos.array()).matrix();
}

namespace {

double marginal_residual(const Matrix &plan, const Vector &r, const Vector &c) {
  const double rows = (plan.rowwise().sum() - r).cwiseAbs().maxCoeff();
  const double cols = (plan.colwise().sum().transpose() - c).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

} // namespace

TransportPlan sinkhorn_plan(const Matrix &cost, const Vector &r, const Vector &c,
                            const SinkhornOptions &options) {
  if (cost.rows() == 0 || cost.cols() == 0)
    fail(ErrorCode::InvalidInput, "sinkhorn: empty cost matrix");
  if (!cost.allFinite() || cost.minCoeff() < 0.0)
    fail(ErrorCode::InvalidInput, "sinkhorn: cost entries must be finite and non-negative");
  if (!(options.reg > 0.0) || !std::isfinite(options.reg))
    fail(ErrorCode::InvalidParameter, "sinkhorn: reg must be positive");
  if (options.iterations < 1)
    fail(ErrorCode::InvalidParameter, "sinkhorn: at least one iteration is required");
  if (options.tolerance && !(*options.tolerance > 0.0))
    fail(ErrorCode::InvalidParameter, "sinkhorn: tolerance must be positive");
  if (r.size() != cost.rows() || c.size() != cost.cols())
    fail(ErrorCode::InvalidParameter, "sinkhorn: marginal lengths do not match the cost");
  if (!(r.minCoeff() > 0.0) || !(c.minCoeff() > 0.0) || !r.allFinite() || !c.allFinite())
    fail(ErrorCode::InvalidParameter, "sinkhorn: marginals must be strictly positive");
  const double rs = r.sum(), cs = c.sum();
  if (std::abs(rs - cs) > 1e-9 * std::max(rs, cs))
    fail(ErrorCode::InvalidParameter, "sinkhorn: marginal sums differ (" + std::to_string(rs) +
                                          " vs " + std::to_string(cs) + ")");

  TransportPlan out;
  out.cost = cost;
  out.row_marginals = r;
  out.col_marginals = c;
  out.reg_strength = options.reg;
  out.ot_lambda = 1.0 / options.reg;

  const double lo = cost.minCoeff();
  const Matrix kernel =
      cost.unaryExpr([&](double x) { return std::exp(-(x - lo) * out.ot_lambda); });
  for (Index i = 0; i < kernel.rows(); ++i)
    if (!(kernel.row(i).sum() > 0.0))
      fail(ErrorCode::NumericalDegeneracy,
           "sinkhorn: kernel row " + std::to_string(i) + " underflowed to zero; increase reg");
  for (Index j = 0; j < kernel.cols(); ++j)
    if (!(kernel.col(j).sum() > 0.0))
      fail(ErrorCode::NumericalDegeneracy,
           "sinkhorn: kernel column " + std::to_string(j) + " underflowed to zero; increase reg");

  Vector u = Vector::Ones(kernel.cols());
  Vector v(kernel.rows());
  std::size_t it = 0;
  double residual = std::numeric_limits<double>::infinity();
  while (it < options.iterations) {
    v = r.cwiseQuotient(kernel * u);
    u = c.cwiseQuotient(kernel.transpose() * v);
    ++it;
    out.plan = v.asDiagonal() * kernel * u.asDiagonal();
    residual = marginal_residual(out.plan, r, c);
    out.residual_history.push_back(residual);
    if (!std::isfinite(residual))
      fail(ErrorCode::NumericalDegeneracy,
           "sinkhorn: scaling vectors became non-finite at iteration " + std::to_string(it));
    if (options.tolerance && residual <= *options.tolerance)
      break;
  }
  out.iterations_run = it;
  out.marginal_residual = residual;
  return out;
}

TransportPlan sinkhorn_plan(const Matrix &cost, double reg, std::size_t iterations,
                            const Vector &r, const Vector &c) {
  return sinkhorn_plan(cost, r, c, SinkhornOptions{reg, iterations, std::nullopt});
}

TransportPlan sinkhorn_plan(const Matrix &cost, const SinkhornOptions &options) {
  const Vector r = Vector::Constant(cost.rows(), 1.0 / static_cast<double>(cost.rows()));
  const Vector c = Vector::Constant(cost.cols(), 1.0 / static_cast<double>(cost.cols()));
  return sinkhorn_plan(cost, r, c, options);
}

double ot_distance(const TransportPlan &plan) {
  if (plan.plan.rows() != plan.cost.rows() || plan.plan.cols() != plan.cost.cols())
    fail(ErrorCode::InvalidInput, "ot_distance: plan and cost shapes differ");
  return plan.plan.cwiseProduct(plan.cost).sum();
}

TransportPlan instance_transport(const ViewPair &pair, const SinkhornOptions &options) {
  return sinkhorn_plan(cost_map(pair.view_a, pair.view_b), options);
}

PairAssignment optimal_transport_pairs(const ViewPairBatch &batch,
                                       const SinkhornOptions &options,
                                       std::vector<TransportPlan> *plans) {
  PairAssignment out = one_directional(batch, MatchingStrategy::OptimalTransport);
  std::vector<TransportPlan> solved(batch.size());
  parallel_for(batch.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      solved[i] = instance_transport(batch[i], options);
  });
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (std::size_t p = 0; p < out.positions; ++p)
      out.positives.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(p),
                               row_argmax(solved[i].plan, static_cast<Index>(p))});
  if (plans)
    *plans = std::move(solved);
  return out;
}

} // namespace dcl
