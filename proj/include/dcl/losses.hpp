#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dcl/feature_core.hpp"
#include "dcl/pair_assignment.hpp"

namespace dcl {

enum class AlignmentConvention { NegCosine, SqDistance };
enum class UniformityScope { PositivePairsLiteral, InterInstanceAllPairs };
enum class ContrastiveVariant { Dense, Instance };

const char *alignment_name(AlignmentConvention c) noexcept;
const char *uniformity_scope_name(UniformityScope s) noexcept;
AlignmentConvention parse_alignment(std::string_view name);
UniformityScope parse_uniformity_scope(std::string_view name);

struct LossConfig {
  static constexpr std::uint64_t kDefaultPairCap = 100000;

  double temperature = 0.19;
  /// Gaussian kernel sharpness t in exp(-t |x - y|^2).
  double kernel_t = 2.0;
  /// Unset: true for the instance loss, false for the dense loss.
  std::optional<bool> include_positive_in_denominator;
  AlignmentConvention alignment = AlignmentConvention::SqDistance;
  UniformityScope uniformity = UniformityScope::InterInstanceAllPairs;
  /// Cap on the number of uniformity pairs; drawn with `seed` when exceeded.
  std::optional<std::uint64_t> pair_subsample = kDefaultPairCap;
  std::uint64_t seed = 0;

  void validate() const;
  bool include_positive_for_instance() const {
    return include_positive_in_denominator.value_or(true);
  }
  bool include_positive_for_dense() const {
    return include_positive_in_denominator.value_or(false);
  }
};

/// value = alignment_term + distribution_term. For the InfoNCE losses the
/// alignment term is the mean of -sim/temperature over anchors and the
/// distribution term the mean log-sum-exp of the denominator.
struct LossReport {
  double value = 0.0;
  double alignment_term = 0.0;
  double distribution_term = 0.0;
  /// Same layout as the input embeddings (1x1 maps for instance vectors).
  std::optional<ViewPairBatch> gradient;
};

struct InstancePair {
  InstanceVector a;
  InstanceVector b;
};

/// Instance-level InfoNCE over 2N view vectors, averaged over all 2N
/// anchors. Each anchor's denominator runs over every other vector.
LossReport instance_info_nce(std::span<const InstancePair> pairs,
                             const LossConfig &cfg, bool with_gradient = false);

/// Dense InfoNCE, averaged over every anchor position the assignment
/// defines.
LossReport dense_info_nce(const ViewPairBatch &batch, const PairAssignment &pairs,
                          const LossConfig &cfg, bool with_gradient = false);

/// Index-wise alignment of view a and view b, under cfg.alignment.
double alignment_loss(const ViewPairBatch &batch, const LossConfig &cfg);

/// log of the mean Gaussian potential over all pairs of dense vectors taken
/// from different maps (scope InterInstanceAllPairs only).
double uniformity_loss(std::span<const FeatureMap> features, const LossConfig &cfg);
/// Literal scope: positive pairs (i, p) of the batch. All-pairs scope: the
/// mean of the per-view values.
double uniformity_loss(const ViewPairBatch &batch, const LossConfig &cfg);

/// Spatial mean of each view, re-normalized.
std::vector<InstancePair> pool_instances(const ViewPairBatch &batch);

struct LossWeights {
  double alignment = 0.0;
  double uniformity = 0.0;
  double contrastive = 0.0;
};

/// w_a L_a + w_u L_u + w_c InfoNCE. The alignment term of the report
/// collects w_a L_a and the contrastive alignment part; the distribution
/// term collects w_u L_u and the contrastive log-sum-exp part.
/// `pairs` is required when w_c > 0 and the variant is Dense.
LossReport combined_loss(const ViewPairBatch &batch, const LossWeights &weights,
                         const LossConfig &cfg, const PairAssignment *pairs,
                         ContrastiveVariant variant = ContrastiveVariant::Dense,
                         bool with_gradient = false);

struct LossSelector {
  enum class Kind { Alignment, Uniformity, DenseInfoNce, InstanceInfoNce, Combined };
  Kind kind = Kind::Alignment;
  /// Needed by DenseInfoNce and by a dense Combined objective.
  const PairAssignment *pairs = nullptr;
  LossWeights weights;
  ContrastiveVariant variant = ContrastiveVariant::Dense;
};

/// Analytical gradient of the selected loss with respect to every dense
/// feature vector, treated as free points in R^d. InstanceInfoNce acts on
/// the spatially pooled features.
ViewPairBatch loss_gradient(const ViewPairBatch &batch, const LossSelector &which,
                            const LossConfig &cfg);

/// Value of the selected loss, matching loss_gradient.
double loss_value(const ViewPairBatch &batch, const LossSelector &which,
                  const LossConfig &cfg);

} // namespace dcl
