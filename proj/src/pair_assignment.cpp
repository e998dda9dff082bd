#include "dcl/pair_assignment.hpp"

#include <charconv>
#include <string>

#include "dcl/error.hpp"
#include "dcl/feature_core.hpp"
#include "dcl/serialize.hpp"

namespace dcl {

const char *strategy_name(MatchingStrategy s) noexcept {
  switch (s) {
  case MatchingStrategy::IndexWise: return "index_wise";
  case MatchingStrategy::CosineArgmax: return "cosine_argmax";
  case MatchingStrategy::OptimalTransport: return "optimal_transport";
  }
  return "unknown";
}

MatchingStrategy parse_strategy(std::string_view name) {
  if (name == "index" || name == "index_wise")
    return MatchingStrategy::IndexWise;
  if (name == "cosine" || name == "cosine_argmax")
    return MatchingStrategy::CosineArgmax;
  if (name == "ot" || name == "optimal_transport")
    return MatchingStrategy::OptimalTransport;
  fail(ErrorCode::InvalidParameter, "unknown matching strategy '" + std::string(name) + "'");
}

std::size_t PairAssignment::cross_instance_pool() const noexcept {
  return instances == 0 ? 0 : (instances - 1) * 2 * positions;
}

std::size_t PairAssignment::negatives_per_anchor() const noexcept {
  std::size_t n = 0;
  if (policy.same_pair_other_view)
    n += positions - 1;
  if (!policy.exclude_own_view)
    n += positions - 1;
  if (policy.cross_instance)
    n += cross_instance_pool();
  return n;
}

void PairAssignment::check_against(const ViewPairBatch &batch) const {
  if (batch.size() != instances || batch.positions() != positions)
    fail(ErrorCode::InvalidInput,
         "pair assignment is for N=" + std::to_string(instances) + ", HW=" +
             std::to_string(positions) + " but the batch has N=" + std::to_string(batch.size()) +
             ", HW=" + std::to_string(batch.positions()));
  for (const auto &pp : positives)
    if (pp.instance >= instances || pp.anchor >= positions || pp.matched >= positions)
      fail(ErrorCode::InvalidInput, "pair assignment entry out of range");
}

namespace {

std::string flag(bool b) { return b ? "1" : "0"; }

std::uint64_t to_u64(std::string_view s, const char *what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorCode::Parse, std::string("pairs CSV: bad ") + what + " '" + std::string(s) + "'");
  return v;
}

} // namespace

std::string PairAssignment::to_csv() const {
  CsvDocument doc;
  doc.comments = {
      "strategy=" + std::string(strategy_name(strategy)),
      "instances=" + std::to_string(instances),
      "positions=" + std::to_string(positions),
      "symmetric=" + flag(symmetric),
      "exclude_own_view=" + flag(policy.exclude_own_view),
      "exclude_positive=" + flag(policy.exclude_positive),
      "same_pair_other_view=" + flag(policy.same_pair_other_view),
      "cross_instance=" + flag(policy.cross_instance),
      "negatives_per_anchor=" + std::to_string(negatives_per_anchor()),
  };
  doc.header = {"i", "p", "q"};
  doc.rows.reserve(positives.size());
  for (const auto &pp : positives)
    doc.rows.push_back(
        {std::to_string(pp.instance), std::to_string(pp.anchor), std::to_string(pp.matched)});
  return doc.format();
}

PairAssignment PairAssignment::from_csv(std::string_view text) {
  const CsvDocument doc = CsvDocument::parse(text);
  PairAssignment out;
  for (const auto &c : doc.comments) {
    const auto eq = c.find('=');
    if (eq == std::string::npos)
      continue;
    const std::string key = c.substr(0, eq);
    const std::string_view value = std::string_view(c).substr(eq + 1);
    if (key == "strategy")
      out.strategy = parse_strategy(value);
    else if (key == "instances")
      out.instances = to_u64(value, "instances");
    else if (key == "positions")
      out.positions = to_u64(value, "positions");
    else if (key == "symmetric")
      out.symmetric = to_u64(value, "flag") != 0;
    else if (key == "exclude_own_view")
      out.policy.exclude_own_view = to_u64(value, "flag") != 0;
    else if (key == "exclude_positive")
      out.policy.exclude_positive = to_u64(value, "flag") != 0;
    else if (key == "same_pair_other_view")
      out.policy.same_pair_other_view = to_u64(value, "flag") != 0;
    else if (key == "cross_instance")
      out.policy.cross_instance = to_u64(value, "flag") != 0;
  }
  if (doc.header != std::vector<std::string>{"i", "p", "q"})
    fail(ErrorCode::Parse, "pairs CSV: expected header i,p,q");
  for (const auto &row : doc.rows) {
    if (row.size() != 3)
      fail(ErrorCode::Parse, "pairs CSV: expected 3 fields per row");
    out.positives.push_back({static_cast<std::uint32_t>(to_u64(row[0], "instance")),
                             static_cast<std::uint32_t>(to_u64(row[1], "anchor")),
                             static_cast<std::uint32_t>(to_u64(row[2], "matched"))});
  }
  return out;
}

} // namespace dcl
