#include "dcl/records.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>

#include "dcl/error.hpp"
#include "dcl/serialize.hpp"

namespace dcl {

namespace {

struct TaskColumns {
  const char *task;
  const char *l_a;
  const char *l_u;
};

constexpr TaskColumns kTaskColumns[] = {
    {"acc", "la_inst", "lu_inst"},
    {"ap", "la_dense", "lu_dense"},
};

const std::set<std::string> kMetricColumns = {"id",       "la_inst",  "lu_inst", "acc",
                                              "la_dense", "lu_dense", "ap"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::optional<double> as_number(std::string_view s) {
  s = trim(s);
  if (s.empty())
    return std::nullopt;
  if (s.front() == '+')
    s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    return std::nullopt;
  return v;
}

std::string join(const std::vector<std::string> &items) {
  std::string out;
  for (const auto &s : items)
    out += (out.empty() ? "" : ", ") + s;
  return out;
}

} // namespace

std::vector<ModelRecord> parse_records_csv(std::string_view text, const std::string &task) {
  const CsvDocument doc = CsvDocument::parse(text);
  std::vector<std::string> header;
  for (const auto &h : doc.header)
    header.emplace_back(trim(h));
  auto column = [&](const std::string &name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };

  const TaskColumns *chosen = nullptr;
  std::vector<std::string> available;
  for (const auto &tc : kTaskColumns) {
    if (column(tc.task) && column(tc.l_a) && column(tc.l_u)) {
      available.emplace_back(tc.task);
      if (task == tc.task)
        chosen = &tc;
    }
  }
  if (!chosen)
    fail(ErrorCode::Schema, "unknown task '" + task + "'; available: " + join(available));

  const std::size_t ia = *column(chosen->l_a), iu = *column(chosen->l_u), ip = *column(chosen->task);
  const auto iid = column("id");
  std::vector<ModelRecord> out;
  out.reserve(doc.rows.size());
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto &row = doc.rows[r];
    ModelRecord rec;
    rec.id = iid && *iid < row.size() ? std::string(trim(row[*iid]))
                                      : "row-" + std::to_string(r + 1);
    if (row.size() != header.size())
      fail(ErrorCode::Schema, "record '" + rec.id + "' has " + std::to_string(row.size()) +
                                  " fields, header has " + std::to_string(header.size()));
    auto number = [&](std::size_t col) {
      const auto v = as_number(row[col]);
      if (!v)
        fail(ErrorCode::Schema, "record '" + rec.id + "': column " + header[col] +
                                    " is not a number ('" + row[col] + "')");
      return *v;
    };
    rec.l_a = number(ia);
    rec.l_u = number(iu);
    rec.performance[task] = number(ip);
    for (std::size_t c = 0; c < header.size(); ++c)
      if (!kMetricColumns.contains(header[c]))
        rec.tags[header[c]] = std::string(trim(row[c]));
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ModelRecord> parse_records_json(std::string_view text, const std::string &task) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorCode::Parse, std::string("records JSON: ") + e.what());
  }
  const nlohmann::json &list = doc.is_object() && doc.contains("records") ? doc["records"] : doc;
  if (!list.is_array())
    fail(ErrorCode::Schema, "records JSON: expected an array of records");

  std::vector<ModelRecord> out;
  std::set<std::string> keys;
  std::optional<std::string> missing;
  for (std::size_t r = 0; r < list.size(); ++r) {
    const auto &item = list[r];
    ModelRecord rec;
    rec.id = item.contains("id") ? item["id"].get<std::string>() : "row-" + std::to_string(r + 1);
    if (!item.contains("l_a") || !item["l_a"].is_number() || !item.contains("l_u") ||
        !item["l_u"].is_number())
      fail(ErrorCode::Schema, "record '" + rec.id + "' needs numeric l_a and l_u");
    rec.l_a = item["l_a"].get<double>();
    rec.l_u = item["l_u"].get<double>();
    if (item.contains("performance")) {
      for (const auto &[k, v] : item["performance"].items()) {
        if (!v.is_number())
          fail(ErrorCode::Schema, "record '" + rec.id + "': performance '" + k + "' is not a number");
        rec.performance[k] = v.get<double>();
        keys.insert(k);
      }
    }
    if (item.contains("tags"))
      for (const auto &[k, v] : item["tags"].items())
        rec.tags[k] = v.is_string() ? v.get<std::string>()
                      : v.is_number() ? format_double(v.get<double>())
                                      : v.dump();
    if (rec.performance.empty())
      fail(ErrorCode::Schema, "record '" + rec.id + "' has no performance entries");
    if (!missing && !rec.performance.contains(task))
      missing = rec.id;
    out.push_back(std::move(rec));
  }
  if (!keys.contains(task))
    fail(ErrorCode::Schema, "unknown task '" + task + "'; available: " +
                                join(std::vector<std::string>(keys.begin(), keys.end())));
  if (missing)
    fail(ErrorCode::Schema, "record '" + *missing + "' has no '" + task + "' metric");
  return out;
}

std::vector<ModelRecord> load_records(const std::string &path, const std::string &task) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::Io, "cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  try {
    return json ? parse_records_json(text, task) : parse_records_csv(text, task);
  } catch (const Error &e) {
    fail(e.code(), path + ": " + e.what());
  }
}

namespace {

struct Clause {
  std::string key;
  std::string op;
  std::string value;
};

std::vector<Clause> parse_filter(std::string_view expr) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= expr.size(); ++k) {
    if (k == expr.size() || expr[k] == ',') {
      parts.push_back(expr.substr(start, k - start));
      start = k + 1;
    } else if (expr.substr(k, 2) == "&&") {
      parts.push_back(expr.substr(start, k - start));
      start = k + 2;
      ++k;
    }
  }
  std::vector<Clause> out;
  for (auto part : parts) {
    part = trim(part);
    if (part.empty())
      continue;
    const auto pos = part.find_first_of("=!<>");
    if (pos == std::string_view::npos || pos == 0)
      fail(ErrorCode::InvalidParameter, "filter clause '" + std::string(part) +
                                            "' is not of the form key op value");
    std::size_t len = 1;
    if (pos + 1 < part.size() && part[pos + 1] == '=')
      len = 2;
    Clause c{std::string(trim(part.substr(0, pos))), std::string(part.substr(pos, len)),
             std::string(trim(part.substr(pos + len)))};
    if (c.op == "!")
      fail(ErrorCode::InvalidParameter, "filter: '!' must be followed by '='");
    if (c.op == "=")
      c.op = "==";
    out.push_back(std::move(c));
  }
  return out;
}

bool holds(const Clause &c, const std::string &actual) {
  const auto a = as_number(actual), b = as_number(c.value);
  if (a && b) {
    if (c.op == "==") return *a == *b;
    if (c.op == "!=") return *a != *b;
    if (c.op == "<") return *a < *b;
    if (c.op == "<=") return *a <= *b;
    if (c.op == ">") return *a > *b;
    return *a >= *b;
  }
  if (c.op == "==") return actual == c.value;
  if (c.op == "!=") return actual != c.value;
  fail(ErrorCode::InvalidParameter,
       "filter: '" + c.op + "' needs numeric operands (key " + c.key + ")");
}

} // namespace

std::vector<ModelRecord> filter_records(const std::vector<ModelRecord> &records,
                                        std::string_view expr) {
  const auto clauses = parse_filter(expr);
  std::vector<ModelRecord> out;
  for (const auto &r : records) {
    bool keep = true;
    for (const auto &c : clauses) {
      std::string actual;
      if (c.key == "id") {
        actual = r.id;
      } else {
        const auto it = r.tags.find(c.key);
        if (it == r.tags.end())
          fail(ErrorCode::Schema, "filter key '" + c.key + "' is not a tag of record '" + r.id + "'");
        actual = it->second;
      }
      if (!holds(c, actual)) {
        keep = false;
        break;
      }
    }
    if (keep)
      out.push_back(r);
  }
  return out;
}

} // namespace dcl
