#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcl/feature_core.hpp"

namespace dcl {

/// Contents of a "DCLF v1" feature dump.
///
/// Layout (little-endian): magic "DCLF", u32 version (1), u32 N, u32 V,
/// u32 d, u32 H, u32 W, then N*V*d*H*W float32 values ordered
/// [instance][view][channel][row][col].
struct FeatureDump {
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kHeaderBytes = 28;

  std::uint32_t instances = 0;
  std::uint32_t views = 0;
  std::uint32_t dim = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> values;

  std::size_t value_count() const noexcept {
    return std::size_t{instances} * views * dim * height * width;
  }

  /// Widened feature map for (instance, view).
  FeatureMap map(std::size_t instance, std::size_t view) const;
  /// One view of every instance.
  std::vector<FeatureMap> view_maps(std::size_t view) const;
  /// Requires views == 2. The maps are returned as stored (not normalized).
  ViewPairBatch to_batch() const;

  static FeatureDump from_batch(const ViewPairBatch &batch);
  static FeatureDump from_maps(std::span<const FeatureMap> maps);
};

/// Parses a DCLF buffer. Wrong magic, wrong version, zero extents and
/// truncated payloads raise ErrorCode::Parse with the failing byte offset.
FeatureDump decode_dclf(std::span<const std::byte> bytes);
std::vector<std::byte> encode_dclf(const FeatureDump &dump);

FeatureDump read_dclf(const std::string &path);
void write_dclf(const std::string &path, const FeatureDump &dump);

} // namespace dcl
