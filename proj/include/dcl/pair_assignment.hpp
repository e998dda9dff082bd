#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dcl {

class ViewPairBatch;

enum class MatchingStrategy { IndexWise, CosineArgmax, OptimalTransport };

const char *strategy_name(MatchingStrategy s) noexcept;
MatchingStrategy parse_strategy(std::string_view name);

/// Which dense features act as negatives for an anchor h(i, p) of view a.
struct NegativePolicy {
  bool exclude_own_view = true;      // h(i, q) of the anchor's own view
  bool exclude_positive = true;      // the matched feature is never a negative
  bool same_pair_other_view = true;  // other-view features of instance i except the positive
  bool cross_instance = true;        // both views of every other instance

  bool operator==(const NegativePolicy &) const = default;
};

struct PositivePair {
  std::uint32_t instance = 0;
  std::uint32_t anchor = 0;   // position p in view a
  std::uint32_t matched = 0;  // position q in view b

  bool operator==(const PositivePair &) const = default;
};

/// Resolved positives and the negative-set description for one batch.
///
/// positives holds one entry per (instance, anchor) in row-major order.
/// When symmetric is set, view-b features are anchors as well, each paired
/// with the view-a feature that selected it; this is only meaningful for
/// one-to-one strategies.
struct PairAssignment {
  MatchingStrategy strategy = MatchingStrategy::IndexWise;
  std::size_t instances = 0;
  std::size_t positions = 0;
  bool symmetric = true;
  NegativePolicy policy;
  std::vector<PositivePair> positives;

  std::size_t anchors_per_view() const noexcept { return instances * positions; }
  std::size_t cross_instance_pool() const noexcept;
  std::size_t negatives_per_anchor() const noexcept;

  /// Throws InvalidInput when the assignment does not fit the batch.
  void check_against(const ViewPairBatch &batch) const;

  bool operator==(const PairAssignment &) const = default;

  /// CSV with metadata comment lines followed by "i,p,q" rows.
  std::string to_csv() const;
  static PairAssignment from_csv(std::string_view text);
};

} // namespace dcl
