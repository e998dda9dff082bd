#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dcl {

struct NormalizedValues {
  std::vector<double> values;
  /// max == min; values are then all zero.
  bool degenerate = false;
};

/// (v - min) / (max - min).
NormalizedValues min_max_normalize(std::span<const double> values);

struct CorrelationReport {
  double tau = 0.0;
  std::uint64_t concordant = 0;  // P
  std::uint64_t discordant = 0;  // Q
  std::uint64_t ties_x = 0;      // T: tied in x only
  std::uint64_t ties_y = 0;      // U: tied in y only
  std::uint64_t ties_both = 0;
  std::size_t n = 0;
  std::string task;
  std::vector<double> normalized_x;
  std::vector<double> normalized_y;
  std::vector<std::string> ids;
  std::vector<std::string> warnings;
};

/// Kendall tau-b, (P - Q) / sqrt((P + Q + T)(P + Q + U)). Pairs tied in
/// both coordinates count toward none of P, Q, T, U. O(n log n).
CorrelationReport kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct ModelRecord {
  std::string id;
  double l_a = 0.0;
  double l_u = 0.0;
  std::map<std::string, double> performance;
  std::map<std::string, std::string> tags;
};

/// x_i = r(L_a)_i + r(L_u)_i, y_i = r(P_task)_i, tau = kendall_tau_b(x, y).
CorrelationReport correlate_models(std::span<const ModelRecord> records,
                                   const std::string &task);

} // namespace dcl
