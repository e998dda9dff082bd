#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dcl/feature_core.hpp"
#include "dcl/pair_assignment.hpp"

namespace dcl {

/// Positives at the same spatial index of both views. Negatives for an
/// anchor are the other-view features at q != p of its own instance plus
/// every feature of the other instances.
PairAssignment index_wise_pairs(const ViewPairBatch &batch);

/// Each view-a feature is paired with its most similar view-b feature (ties
/// go to the lowest index). Negatives are the features of other instances.
PairAssignment cosine_argmax_pairs(const ViewPairBatch &batch);

/// Cosine distance 1 - cos(a_p, b_q), entries in [0, 2].
Matrix cost_map(const FeatureMap &a, const FeatureMap &b);

struct SinkhornOptions {
  /// Entropic regularization E; the kernel sharpness is 1 / reg.
  double reg = 0.1;
  /// Fixed iteration count, or the cap in convergence mode.
  std::size_t iterations = 10;
  /// When set, iterate until marginal_residual <= tolerance (or the cap).
  std::optional<double> tolerance;
};

struct TransportPlan {
  Matrix plan;
  Vector row_marginals;
  Vector col_marginals;
  Matrix cost;
  double reg_strength = 0.0;
  double ot_lambda = 0.0;
  std::size_t iterations_run = 0;
  /// max of |P 1 - r|_inf and |P^T 1 - c|_inf for the returned plan.
  double marginal_residual = 0.0;
  /// Residual after every iteration.
  std::vector<double> residual_history;
};

/// Sinkhorn-Knopp scaling. With K = exp(-(cost - min cost) / reg), u = 1,
/// each iteration sets v = r / (K u) then u = c / (K^T v), and the plan is
/// diag(v) K diag(u). The shift by min cost rescales K by a constant that
/// the scaling vectors absorb.
TransportPlan sinkhorn_plan(const Matrix &cost, const Vector &r, const Vector &c,
                            const SinkhornOptions &options);
TransportPlan sinkhorn_plan(const Matrix &cost, double reg, std::size_t iterations,
                            const Vector &r, const Vector &c);
/// Uniform marginals 1/rows and 1/cols.
TransportPlan sinkhorn_plan(const Matrix &cost, const SinkhornOptions &options);

/// <P, TM>.
double ot_distance(const TransportPlan &plan);

/// Plan between view a and view b of one instance.
TransportPlan instance_transport(const ViewPair &pair, const SinkhornOptions &options);

/// Hard top-1 extraction: every view-a anchor takes the column of its row
/// maximum in the instance's plan (lowest index on ties). Negatives follow
/// the cosine_argmax policy. When `plans` is non-null it receives the plans.
PairAssignment optimal_transport_pairs(const ViewPairBatch &batch,
                                       const SinkhornOptions &options,
                                       std::vector<TransportPlan> *plans = nullptr);

} // namespace dcl
