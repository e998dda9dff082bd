#include "dcl/rank_correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcl/error.hpp"

namespace dcl {

NormalizedValues min_max_normalize(std::span<const double> values) {
  if (values.empty())
    fail(ErrorCode::InvalidInput, "min_max_normalize: empty input");
  for (double v : values)
    if (!std::isfinite(v))
      fail(ErrorCode::InvalidInput, "min_max_normalize: non-finite value");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  NormalizedValues out;
  out.values.resize(values.size(), 0.0);
  if (*hi == *lo) {
    out.degenerate = true;
    return out;
  }
  const double span = *hi - *lo;
  for (std::size_t k = 0; k < values.size(); ++k)
    out.values[k] = (values[k] - *lo) / span;
  return out;
}

namespace {

std::uint64_t tie_pairs(std::uint64_t run) { return run * (run - 1) / 2; }

/// Sorts idx by y with a stable merge sort and returns the number of
/// strictly inverted pairs.
std::uint64_t merge_count(std::vector<std::size_t> &idx, std::span<const double> y) {
  std::vector<std::size_t> buf(idx.size());
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < idx.size(); width *= 2) {
    for (std::size_t lo = 0; lo < idx.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, idx.size());
      const std::size_t hi = std::min(lo + 2 * width, idx.size());
      std::size_t a = lo, b = mid, o = lo;
      while (a < mid && b < hi) {
        if (y[idx[b]] < y[idx[a]]) {
          swaps += mid - a;
          buf[o++] = idx[b++];
        } else {
          buf[o++] = idx[a++];
        }
      }
      while (a < mid)
        buf[o++] = idx[a++];
      while (b < hi)
        buf[o++] = idx[b++];
    }
    idx.swap(buf);
  }
  return swaps;
}

} // namespace

CorrelationReport kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    fail(ErrorCode::InvalidInput, "kendall_tau_b: length mismatch");
  const std::size_t n = x.size();
  if (n < 2)
    fail(ErrorCode::InvalidInput, "kendall_tau_b: need at least 2 observations");
  for (std::size_t k = 0; k < n; ++k)
    if (!std::isfinite(x[k]) || !std::isfinite(y[k]))
      fail(ErrorCode::InvalidInput, "kendall_tau_b: non-finite value");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  std::uint64_t tied_x = 0, tied_xy = 0;
  for (std::size_t start = 0, k = 1; k <= n; ++k) {
    if (k == n || x[idx[k]] != x[idx[start]]) {
      tied_x += tie_pairs(k - start);
      start = k;
    }
  }
  for (std::size_t start = 0, k = 1; k <= n; ++k) {
    if (k == n || x[idx[k]] != x[idx[start]] || y[idx[k]] != y[idx[start]]) {
      tied_xy += tie_pairs(k - start);
      start = k;
    }
  }

  const std::uint64_t discordant = merge_count(idx, y);

  std::uint64_t tied_y = 0;
  for (std::size_t start = 0, k = 1; k <= n; ++k) {
    if (k == n || y[idx[k]] != y[idx[start]]) {
      tied_y += tie_pairs(k - start);
      start = k;
    }
  }

  CorrelationReport out;
  out.n = n;
  const std::uint64_t all = tie_pairs(n);
  out.ties_both = tied_xy;
  out.ties_x = tied_x - tied_xy;
  out.ties_y = tied_y - tied_xy;
  out.discordant = discordant;
  out.concordant = all - tied_x - tied_y + tied_xy - discordant;

  const double pq = static_cast<double>(out.concordant + out.discordant);
  const double dx = pq + static_cast<double>(out.ties_x);
  const double dy = pq + static_cast<double>(out.ties_y);
  if (dx == 0.0 || dy == 0.0)
    fail(ErrorCode::UndefinedCorrelation,
         "kendall_tau_b: every pair is tied in one variable; tau is undefined");
  out.tau = (static_cast<double>(out.concordant) - static_cast<double>(out.discordant)) /
            std::sqrt(dx * dy);
  return out;
}

CorrelationReport correlate_models(std::span<const ModelRecord> records,
                                   const std::string &task) {
  if (records.size() < 2)
    fail(ErrorCode::InsufficientInput,
         "correlate_models: need at least 2 records, got " + std::to_string(records.size()));
  std::vector<double> la, lu, perf;
  std::vector<std::string> ids;
  for (const auto &r : records) {
    const auto it = r.performance.find(task);
    if (it == r.performance.end())
      fail(ErrorCode::Schema, "record '" + r.id + "' has no '" + task + "' metric");
    if (!std::isfinite(r.l_a) || !std::isfinite(r.l_u) || !std::isfinite(it->second))
      fail(ErrorCode::InvalidInput, "record '" + r.id + "' has non-finite values");
    la.push_back(r.l_a);
    lu.push_back(r.l_u);
    perf.push_back(it->second);
    ids.push_back(r.id);
  }
  const NormalizedValues ra = min_max_normalize(la);
  const NormalizedValues ru = min_max_normalize(lu);
  const NormalizedValues rp = min_max_normalize(perf);
  std::vector<double> x(records.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    x[k] = ra.values[k] + ru.values[k];

  CorrelationReport out = kendall_tau_b(x, rp.values);
  out.task = task;
  out.normalized_x = std::move(x);
  out.normalized_y = rp.values;
  out.ids = std::move(ids);
  if (ra.degenerate)
    out.warnings.push_back("l_a is constant across records (degenerate scale)");
  if (ru.degenerate)
    out.warnings.push_back("l_u is constant across records (degenerate scale)");
  if (rp.degenerate)
    out.warnings.push_back(task + " is constant across records (degenerate scale)");
  return out;
}

} // namespace dcl
