#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dcl/losses.hpp"
#include "dcl/matching.hpp"
#include "dcl/rank_correlation.hpp"

namespace dcl {

/// Shortest decimal text that parses back to the same double, '.'
/// separator regardless of locale.
std::string format_double(double v);
double parse_double(std::string_view text);

/// Comment lines ('#'), a header row and data rows; LF line endings, no
/// quoting. format(parse(text)) == text for any text format() produced.
struct CsvDocument {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string format() const;
  static CsvDocument parse(std::string_view text);
};

nlohmann::json to_json(const LossReport &report);
/// Nested plan/cost arrays are emitted only when include_matrices is set.
nlohmann::json to_json(const TransportPlan &plan, bool include_matrices);
nlohmann::json to_json(const CorrelationReport &report);
nlohmann::json to_json(const PairAssignment &pairs);

/// Largest HW for which plans are written inline.
constexpr std::size_t kInlinePlanLimit = 64;

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(std::span<const std::byte> bytes);

} // namespace dcl
