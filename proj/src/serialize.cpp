#include "dcl/serialize.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "dcl/error.hpp"

namespace dcl {

std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    fail(ErrorCode::Parse, "not a number: '" + std::string(text) + "'");
  return v;
}

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void append_row(std::string &out, const std::vector<std::string> &fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k)
      out += ',';
    out += fields[k];
  }
  out += '\n';
}

} // namespace

std::string CsvDocument::format() const {
  std::string out;
  for (const auto &c : comments)
    out += "# " + c + '\n';
  append_row(out, header);
  for (const auto &r : rows)
    append_row(out, r);
  return out;
}

CsvDocument CsvDocument::parse(std::string_view text) {
  CsvDocument doc;
  bool have_header = false;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (line.empty())
      continue;
    if (line.front() == '#') {
      line.remove_prefix(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      doc.comments.emplace_back(line);
    } else if (!have_header) {
      doc.header = split_fields(line);
      have_header = true;
    } else {
      doc.rows.push_back(split_fields(line));
    }
  }
  if (!have_header)
    fail(ErrorCode::Parse, "CSV has no header row");
  return doc;
}

namespace {

nlohmann::json matrix_json(const Matrix &m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_json(const Vector &v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k)
    out.push_back(v(k));
  return out;
}

} // namespace

nlohmann::json to_json(const LossReport &report) {
  return {{"value", report.value},
          {"alignment_term", report.alignment_term},
          {"distribution_term", report.distribution_term}};
}

nlohmann::json to_json(const TransportPlan &plan, bool include_matrices) {
  nlohmann::json j = {
      {"rows", plan.plan.rows()},
      {"cols", plan.plan.cols()},
      {"reg", plan.reg_strength},
      {"ot_lambda", plan.ot_lambda},
      {"iterations", plan.iterations_run},
      {"marginal_residual", plan.marginal_residual},
      {"ot_distance", ot_distance(plan)},
      {"row_marginals", vector_json(plan.row_marginals)},
      {"col_marginals", vector_json(plan.col_marginals)},
  };
  if (include_matrices) {
    j["plan"] = matrix_json(plan.plan);
    j["cost"] = matrix_json(plan.cost);
  }
  return j;
}

nlohmann::json to_json(const CorrelationReport &report) {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t k = 0; k < report.normalized_x.size(); ++k) {
    nlohmann::json p = {{"x", report.normalized_x[k]}, {"y", report.normalized_y[k]}};
    if (k < report.ids.size())
      p["id"] = report.ids[k];
    points.push_back(std::move(p));
  }
  return {{"tau", report.tau},
          {"P", report.concordant},
          {"Q", report.discordant},
          {"T", report.ties_x},
          {"U", report.ties_y},
          {"ties_both", report.ties_both},
          {"n", report.n},
          {"task", report.task},
          {"points", std::move(points)},
          {"warnings", report.warnings}};
}

nlohmann::json to_json(const PairAssignment &pairs) {
  nlohmann::json positives = nlohmann::json::array();
  for (const auto &pp : pairs.positives)
    positives.push_back({pp.instance, pp.anchor, pp.matched});
  return {{"strategy", strategy_name(pairs.strategy)},
          {"instances", pairs.instances},
          {"positions", pairs.positions},
          {"symmetric", pairs.symmetric},
          {"negative_policy",
           {{"exclude_own_view", pairs.policy.exclude_own_view},
            {"exclude_positive", pairs.policy.exclude_positive},
            {"same_pair_other_view", pairs.policy.same_pair_other_view},
            {"cross_instance", pairs.policy.cross_instance}}},
          {"negatives_per_anchor", pairs.negatives_per_anchor()},
          {"positives", std::move(positives)}};
}

std::string fnv1a_hex(std::span<const std::byte> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace dcl
