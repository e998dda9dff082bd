// dcl-analyze: alignment/uniformity metrics, dense matching, transport plans,
// correlation studies and sphere optimization runs from the command line.
#include <array>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcl/dcl.h"

using nlohmann::json;

namespace {

constexpr const char *kToolName = "dcl-analyze";
constexpr const char *kOutputDirEnv = "DCL_OUTPUT_DIR";

enum ExitCode { kExitOk = 0, kExitError = 1, kExitUsage = 2, kExitPartial = 3 };

class CliError : public std::runtime_error {
public:
  CliError(dcl_status status, const std::string &what)
      : std::runtime_error(what), status_(status) {}
  dcl_status status() const noexcept { return status_; }

private:
  dcl_status status_;
};

void check(dcl_status s, const std::string &context = {}) {
  if (s == DCL_OK)
    return;
  std::string msg = dcl_last_error_message();
  if (!context.empty())
    msg = context + ": " + msg;
  throw CliError(s, msg);
}

template <class T, void (*Free)(T *)> struct Deleter {
  void operator()(T *p) const { Free(p); }
};
using DumpPtr = std::unique_ptr<dcl_dump, Deleter<dcl_dump, dcl_dump_free>>;
using PairsPtr = std::unique_ptr<dcl_assignment, Deleter<dcl_assignment, dcl_assignment_free>>;
using PlanPtr = std::unique_ptr<dcl_plan, Deleter<dcl_plan, dcl_plan_free>>;
using RecordsPtr = std::unique_ptr<dcl_records, Deleter<dcl_records, dcl_records_free>>;
using CorrPtr = std::unique_ptr<dcl_correlation, Deleter<dcl_correlation, dcl_correlation_free>>;
using OptPtr = std::unique_ptr<dcl_optimizer, Deleter<dcl_optimizer, dcl_optimizer_free>>;

std::string take(char *s) {
  std::string out = s ? s : "";
  dcl_string_free(s);
  return out;
}

std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

struct Options {
  std::vector<std::string> inputs;
  std::string records;
  std::string output;
  std::string format;
  double temperature = 0.19;
  double kernel_t = 2.0;
  std::string alignment;
  std::string uniformity_scope = "all-pairs";
  std::string include_positive = "default";
  std::string matching = "index";
  double reg = 0.1;
  unsigned iters = 10;
  double tolerance = 0.0;
  std::uint64_t pair_subsample = 100000;
  std::uint64_t seed = 0;
  std::string filter;
  std::string task = "acc";
  unsigned threads = 1;
  std::optional<std::uint32_t> instance;
  // optimize
  std::uint32_t n = 64;
  std::uint32_t hw = 1;
  std::uint32_t d = 8;
  std::uint32_t steps = 500;
  double lr = 0.05;
  double w_a = 0.5;
  double w_u = 1.0;
  double w_c = 0.0;
  double noise = 0.05;
  std::string contrastive = "dense";
  std::string export_path;
};

int parse_include_positive(const std::string &v) {
  if (v == "default")
    return -1;
  if (v == "true" || v == "1" || v == "yes")
    return 1;
  if (v == "false" || v == "0" || v == "no")
    return 0;
  throw CliError(DCL_ERR_INVALID_PARAMETER, "--include-positive expects true, false or default");
}

int parse_matching(const std::string &v) {
  if (v == "index" || v == "index_wise")
    return DCL_MATCH_INDEX;
  if (v == "cosine" || v == "cosine_argmax")
    return DCL_MATCH_COSINE;
  if (v == "ot" || v == "optimal_transport")
    return DCL_MATCH_OT;
  throw CliError(DCL_ERR_INVALID_PARAMETER, "--matching expects index, cosine or ot");
}

dcl_loss_config loss_config(const Options &o, const char *default_alignment) {
  dcl_loss_config c;
  dcl_loss_config_init(&c);
  c.temperature = o.temperature;
  c.kernel_t = o.kernel_t;
  c.include_positive = parse_include_positive(o.include_positive);
  const std::string align = o.alignment.empty() ? default_alignment : o.alignment;
  c.alignment = align == "neg-cosine" ? DCL_ALIGN_NEG_COSINE : DCL_ALIGN_SQ_DISTANCE;
  c.uniformity_scope = o.uniformity_scope == "literal" ? DCL_UNIFORMITY_LITERAL
                                                        : DCL_UNIFORMITY_ALL_PAIRS;
  c.pair_subsample = o.pair_subsample;
  c.seed = o.seed;
  return c;
}

dcl_sinkhorn_params sinkhorn_params(const Options &o) {
  dcl_sinkhorn_params p;
  dcl_sinkhorn_params_init(&p);
  p.reg = o.reg;
  p.iterations = o.iters;
  p.tolerance = o.tolerance;
  return p;
}

json config_json(const Options &o, const dcl_loss_config &c) {
  return {{"temperature", c.temperature},
          {"kernel_t", c.kernel_t},
          {"include_positive", o.include_positive},
          {"alignment", c.alignment == DCL_ALIGN_NEG_COSINE ? "neg-cosine" : "sq-distance"},
          {"uniformity_scope", c.uniformity_scope == DCL_UNIFORMITY_LITERAL ? "literal" : "all-pairs"},
          {"pair_subsample", c.pair_subsample},
          {"matching", o.matching},
          {"reg", o.reg},
          {"iters", o.iters},
          {"tolerance", o.tolerance}};
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CliError(DCL_ERR_IO, "cannot open '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

json file_entry(const std::string &path) {
  const std::string bytes = read_text(path);
  char *digest = nullptr;
  check(dcl_digest_bytes(bytes.data(), bytes.size(), &digest));
  return {{"path", path}, {"fnv1a", take(digest)}, {"bytes", bytes.size()}};
}

json provenance(const std::string &command, const Options &o, json config, json inputs) {
  return {{"tool", kToolName},
          {"version", dcl_version()},
          {"command", command},
          {"seed", o.seed},
          {"config", std::move(config)},
          {"inputs", std::move(inputs)}};
}

/// Flattens provenance into "key=value" comment lines for CSV outputs.
std::string provenance_comments(const json &prov) {
  std::string out;
  out += "# tool=" + prov["tool"].get<std::string>() + "\n";
  out += "# version=" + prov["version"].get<std::string>() + "\n";
  out += "# command=" + prov["command"].get<std::string>() + "\n";
  out += "# seed=" + prov["seed"].dump() + "\n";
  for (const auto &[k, v] : prov["config"].items())
    out += "# config." + k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
  for (const auto &in : prov["inputs"])
    out += "# input=" + in["path"].get<std::string>() + " fnv1a=" + in["fnv1a"].get<std::string>() +
           "\n";
  return out;
}

std::string resolve_output(const Options &o, const std::string &command, const std::string &ext) {
  if (!o.output.empty())
    return o.output;
  if (const char *dir = std::getenv(kOutputDirEnv); dir && *dir)
    return (std::filesystem::path(dir) / (command + "." + ext)).string();
  return {};
}

void ensure_parent(const std::string &path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
}

void emit(const std::string &path, const std::string &content) {
  if (path.empty()) {
    std::cout << content;
    std::cout.flush();
    return;
  }
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content))
    throw CliError(DCL_ERR_IO, "cannot write '" + path + "'");
}

std::string json_text(const json &j) { return j.dump(2) + "\n"; }

std::string pick_format(const Options &o, const char *fallback) {
  const std::string f = o.format.empty() ? fallback : o.format;
  if (f != "json" && f != "csv")
    throw CliError(DCL_ERR_INVALID_PARAMETER, "--format expects json or csv");
  return f;
}

DumpPtr load_dump(const std::string &path) {
  dcl_dump *d = nullptr;
  check(dcl_dump_read_file(path.c_str(), &d));
  return DumpPtr(d);
}

json shape_json(const dcl_dump *d) {
  dcl_shape s{};
  check(dcl_dump_get_shape(d, &s));
  return {{"N", s.instances}, {"V", s.views}, {"d", s.dim}, {"H", s.height}, {"W", s.width}};
}

json report_json(const dcl_loss_report &r) {
  return {{"value", r.value},
          {"alignment_term", r.alignment_term},
          {"distribution_term", r.distribution_term}};
}

json failure(const std::string &item, const std::string &what, const CliError &e) {
  return {{"item", item},
          {"computation", what},
          {"status", dcl_status_name(e.status())},
          {"message", e.what()}};
}

void require_single_input(const Options &o, const char *command) {
  if (o.inputs.size() != 1)
    throw CliError(DCL_ERR_INVALID_PARAMETER,
                   std::string(command) + " takes exactly one --input dump");
}

// ---- metrics

int cmd_metrics(const Options &o) {
  if (o.inputs.empty())
    throw CliError(DCL_ERR_INVALID_PARAMETER, "metrics needs at least one --input dump");
  const std::string format = pick_format(o, "json");
  dcl_loss_config cfg = loss_config(o, "sq-distance");
  const int strategy = parse_matching(o.matching);
  const dcl_sinkhorn_params sp = sinkhorn_params(o);

  json inputs = json::array(), results = json::array(), failures = json::array();
  for (const auto &path : o.inputs) {
    json entry = file_entry(path);
    DumpPtr dump;
    try {
      dump = load_dump(path);
    } catch (const CliError &e) {
      inputs.push_back(entry);
      failures.push_back(failure(path, "load", e));
      continue;
    }
    entry["shape"] = shape_json(dump.get());
    inputs.push_back(entry);

    json r = {{"input", path}};
    auto attempt = [&](const char *what, auto &&body) {
      try {
        body();
      } catch (const CliError &e) {
        failures.push_back(failure(path, what, e));
      }
    };
    attempt("l_a", [&] {
      dcl_loss_config c = cfg;
      double neg = 0.0, sq = 0.0;
      c.alignment = DCL_ALIGN_NEG_COSINE;
      check(dcl_alignment_loss(dump.get(), &c, &neg), path);
      c.alignment = DCL_ALIGN_SQ_DISTANCE;
      check(dcl_alignment_loss(dump.get(), &c, &sq), path);
      r["l_a"] = {{"neg_cosine", neg}, {"sq_distance", sq}};
    });
    attempt("l_u", [&] {
      double lu = 0.0;
      check(dcl_uniformity_loss(dump.get(), &cfg, &lu), path);
      r["l_u"] = lu;
    });
    attempt("dense_info_nce", [&] {
      dcl_assignment *raw = nullptr;
      check(dcl_match(dump.get(), strategy, &sp, &raw), path);
      PairsPtr pairs(raw);
      dcl_loss_report rep{};
      check(dcl_dense_info_nce(dump.get(), pairs.get(), &cfg, &rep), path);
      r["dense_info_nce"] = report_json(rep);
    });
    attempt("instance_info_nce", [&] {
      dcl_loss_report rep{};
      check(dcl_instance_info_nce(dump.get(), &cfg, &rep), path);
      r["instance_info_nce"] = report_json(rep);
    });
    results.push_back(std::move(r));
  }

  const json prov = provenance("metrics", o, config_json(o, cfg), inputs);
  std::string text;
  if (format == "json") {
    text = json_text({{"provenance", prov}, {"results", results}, {"failures", failures}});
  } else {
    text = provenance_comments(prov) + "input,metric,value\n";
    for (const auto &r : results) {
      const std::string in = r["input"].get<std::string>();
      if (r.contains("l_a")) {
        text += in + ",l_a_neg_cosine," + fmt(r["l_a"]["neg_cosine"].get<double>()) + "\n";
        text += in + ",l_a_sq_distance," + fmt(r["l_a"]["sq_distance"].get<double>()) + "\n";
      }
      if (r.contains("l_u"))
        text += in + ",l_u," + fmt(r["l_u"].get<double>()) + "\n";
      for (const char *k : {"dense_info_nce", "instance_info_nce"})
        if (r.contains(k))
          text += in + "," + k + "," + fmt(r[k]["value"].get<double>()) + "\n";
    }
  }
  emit(resolve_output(o, "metrics", format), text);
  for (const auto &f : failures)
    std::cerr << kToolName << ": " << f["item"].get<std::string>() << ": "
              << f["computation"].get<std::string>() << " failed ("
              << f["status"].get<std::string>() << "): " << f["message"].get<std::string>()
              << "\n";
  return failures.empty() ? kExitOk : kExitPartial;
}

// ---- match

int cmd_match(const Options &o) {
  require_single_input(o, "match");
  const std::string format = pick_format(o, "csv");
  const std::string &path = o.inputs.front();
  json inputs = json::array({file_entry(path)});
  DumpPtr dump = load_dump(path);
  inputs[0]["shape"] = shape_json(dump.get());
  const dcl_sinkhorn_params sp = sinkhorn_params(o);
  dcl_assignment *raw = nullptr;
  check(dcl_match(dump.get(), parse_matching(o.matching), &sp, &raw), path);
  PairsPtr pairs(raw);

  const dcl_loss_config cfg = loss_config(o, "sq-distance");
  const json prov = provenance("match", o, config_json(o, cfg), inputs);
  char *s = nullptr;
  std::string text;
  if (format == "csv") {
    check(dcl_assignment_to_csv(pairs.get(), &s));
    text = provenance_comments(prov) + take(s);
  } else {
    check(dcl_assignment_to_json(pairs.get(), &s));
    text = json_text({{"provenance", prov}, {"pairs", json::parse(take(s))}});
  }
  emit(resolve_output(o, "match", format), text);
  return kExitOk;
}

// ---- transport

int cmd_transport(const Options &o) {
  require_single_input(o, "transport");
  pick_format(o, "json");
  if (o.format == "csv")
    throw CliError(DCL_ERR_INVALID_PARAMETER, "transport writes json only");
  const std::string &path = o.inputs.front();
  json inputs = json::array({file_entry(path)});
  DumpPtr dump = load_dump(path);
  inputs[0]["shape"] = shape_json(dump.get());
  dcl_shape shape{};
  check(dcl_dump_get_shape(dump.get(), &shape));
  const dcl_sinkhorn_params sp = sinkhorn_params(o);

  std::vector<std::uint32_t> which;
  if (o.instance) {
    which.push_back(*o.instance);
  } else {
    for (std::uint32_t i = 0; i < shape.instances; ++i)
      which.push_back(i);
  }

  const std::string out_path = resolve_output(o, "transport", "json");
  const bool sidecar = std::uint64_t{shape.height} * shape.width > 64;
  if (sidecar && out_path.empty())
    throw CliError(DCL_ERR_INVALID_PARAMETER,
                   "plans with more than 64 positions go to a sidecar file; pass --output");
  const std::string sidecar_path = out_path + ".plans.dclf";

  json plans = json::array(), failures = json::array();
  std::vector<PlanPtr> kept;
  for (const auto i : which) {
    const std::string item = path + "#" + std::to_string(i);
    try {
      dcl_plan *raw = nullptr;
      check(dcl_transport(dump.get(), i, &sp, &raw), item);
      PlanPtr plan(raw);
      char *s = nullptr;
      check(dcl_plan_to_json(plan.get(), &s));
      json pj = json::parse(take(s));
      pj["instance"] = i;
      if (sidecar)
        pj["sidecar_index"] = kept.size();
      plans.push_back(std::move(pj));
      kept.push_back(std::move(plan));
    } catch (const CliError &e) {
      failures.push_back(failure(item, "transport", e));
    }
  }

  const dcl_loss_config cfg = loss_config(o, "sq-distance");
  json report = {{"provenance", provenance("transport", o, config_json(o, cfg), inputs)},
                 {"plans", plans},
                 {"failures", failures}};
  if (sidecar && !kept.empty()) {
    std::vector<const dcl_plan *> raw;
    for (const auto &p : kept)
      raw.push_back(p.get());
    ensure_parent(sidecar_path);
    check(dcl_plans_write_sidecar(raw.data(), raw.size(), sidecar_path.c_str()));
    report["sidecar"] = std::filesystem::path(sidecar_path).filename().string();
  }
  emit(out_path, json_text(report));
  for (const auto &f : failures)
    std::cerr << kToolName << ": " << f["item"].get<std::string>() << ": "
              << f["message"].get<std::string>() << "\n";
  return failures.empty() ? kExitOk : kExitPartial;
}

// ---- correlate

int cmd_correlate(const Options &o) {
  if (o.records.empty())
    throw CliError(DCL_ERR_INVALID_PARAMETER, "correlate needs --records");
  const std::string format = pick_format(o, "json");
  json inputs = json::array({file_entry(o.records)});
  dcl_records *raw = nullptr;
  check(dcl_records_load(o.records.c_str(), o.task.c_str(), &raw));
  RecordsPtr records(raw);
  if (!o.filter.empty()) {
    dcl_records *kept = nullptr;
    check(dcl_records_filter(records.get(), o.filter.c_str(), &kept), o.records);
    records.reset(kept);
  }
  dcl_correlation *corr_raw = nullptr;
  check(dcl_correlate(records.get(), o.task.c_str(), &corr_raw), o.records);
  CorrPtr corr(corr_raw);

  json config = {{"task", o.task}, {"filter", o.filter}};
  const json prov = provenance("correlate", o, config, inputs);
  char *s = nullptr;
  std::string text;
  if (format == "json") {
    check(dcl_correlation_to_json(corr.get(), &s));
    json report = json::parse(take(s));
    report["provenance"] = prov;
    text = json_text(report);
  } else {
    check(dcl_correlation_points_csv(corr.get(), &s));
    text = provenance_comments(prov) + take(s);
  }
  emit(resolve_output(o, "correlate", format), text);
  return kExitOk;
}

// ---- optimize

int cmd_optimize(const Options &o) {
  const std::string format = pick_format(o, "csv");
  dcl_optimizer_params p;
  dcl_optimizer_params_init(&p);
  p.instances = o.n;
  p.positions = o.hw;
  p.dim = o.d;
  p.seed = o.seed;
  p.noise = o.noise;
  p.lr = o.lr;
  dcl_optimizer *raw = nullptr;
  check(dcl_optimizer_create(&p, &raw));
  OptPtr opt(raw);

  const dcl_loss_config cfg = loss_config(o, "neg-cosine");
  const dcl_loss_weights w{o.w_a, o.w_u, o.w_c,
                           o.contrastive == "instance" ? DCL_CONTRASTIVE_INSTANCE
                                                       : DCL_CONTRASTIVE_DENSE};
  check(dcl_optimizer_run(opt.get(), o.steps, &w, &cfg));
  double cosine = 0.0;
  check(dcl_optimizer_mean_positive_cosine(opt.get(), &cosine));

  json config = config_json(o, cfg);
  config.erase("matching");
  config.erase("reg");
  config.erase("iters");
  config.erase("tolerance");
  config.update({{"n", o.n},
                 {"hw", o.hw},
                 {"d", o.d},
                 {"steps", o.steps},
                 {"lr", o.lr},
                 {"noise", o.noise},
                 {"w_a", o.w_a},
                 {"w_u", o.w_u},
                 {"w_c", o.w_c},
                 {"contrastive", o.contrastive}});
  const json prov = provenance("optimize", o, config, json::array());

  std::string text;
  if (format == "csv") {
    char *s = nullptr;
    check(dcl_optimizer_history_csv(opt.get(), &s));
    text = provenance_comments(prov) + "# mean_positive_cosine=" + fmt(cosine) + "\n" + take(s);
  } else {
    std::uint64_t count = 0;
    check(dcl_optimizer_history_size(opt.get(), &count));
    json history = json::array();
    for (std::uint64_t k = 0; k < count; ++k) {
      std::uint64_t step = 0;
      double la = 0, lu = 0, loss = 0;
      check(dcl_optimizer_history_entry(opt.get(), k, &step, &la, &lu, &loss));
      history.push_back({{"step", step}, {"l_a", la}, {"l_u", lu}, {"loss", loss}});
    }
    text = json_text(
        {{"provenance", prov}, {"mean_positive_cosine", cosine}, {"history", history}});
  }
  if (!o.export_path.empty()) {
    ensure_parent(o.export_path);
    dcl_dump *d = nullptr;
    check(dcl_optimizer_export(opt.get(), &d));
    DumpPtr dump(d);
    check(dcl_dump_write_file(dump.get(), o.export_path.c_str()));
  }
  emit(resolve_output(o, "optimize", format), text);
  return kExitOk;
}

void add_common(CLI::App *sub, Options &o) {
  sub->add_option("--output,-o", o.output, "Output file (default: stdout, or $" +
                                               std::string(kOutputDirEnv) + "/<command>.<ext>)");
  sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--seed", o.seed, "Seed for subsampling and initialization");
  sub->add_option("--threads", o.threads, "Worker threads (0: hardware); results do not depend on it");
}

void add_loss(CLI::App *sub, Options &o) {
  sub->add_option("--temperature", o.temperature, "InfoNCE temperature");
  sub->add_option("--kernel-t", o.kernel_t, "Gaussian potential sharpness t");
  sub->add_option("--alignment", o.alignment, "neg-cosine or sq-distance")
      ->check(CLI::IsMember({"neg-cosine", "sq-distance"}));
  sub->add_option("--uniformity-scope", o.uniformity_scope, "literal or all-pairs")
      ->check(CLI::IsMember({"literal", "all-pairs"}));
  sub->add_option("--include-positive", o.include_positive,
                  "Positive in the InfoNCE denominator: true, false or default");
  sub->add_option("--pair-subsample", o.pair_subsample, "Uniformity pair cap (0: no cap)");
}

void add_matching(CLI::App *sub, Options &o) {
  sub->add_option("--matching", o.matching, "index, cosine or ot");
  sub->add_option("--reg", o.reg, "Entropic regularization for ot");
  sub->add_option("--iters", o.iters, "Sinkhorn iterations (cap with --tolerance)");
  sub->add_option("--tolerance", o.tolerance, "Iterate Sinkhorn until the marginal residual is below");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Dense contrastive representation analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dcl_version());
  Options o;

  auto *metrics = app.add_subcommand("metrics", "Alignment, uniformity and InfoNCE of feature dumps");
  metrics->add_option("--input,-i", o.inputs, "DCLF feature dump (repeatable)")->required();
  add_common(metrics, o);
  add_loss(metrics, o);
  add_matching(metrics, o);

  auto *match = app.add_subcommand("match", "Positive pairs and negative policy for a dump");
  match->add_option("--input,-i", o.inputs, "DCLF feature dump")->required();
  add_common(match, o);
  add_matching(match, o);

  auto *transport = app.add_subcommand("transport", "Sinkhorn plans between the views of each instance");
  transport->add_option("--input,-i", o.inputs, "DCLF feature dump")->required();
  transport->add_option("--instance", o.instance, "Only this instance");
  add_common(transport, o);
  transport->add_option("--reg", o.reg, "Entropic regularization");
  transport->add_option("--iters", o.iters, "Sinkhorn iterations (cap with --tolerance)");
  transport->add_option("--tolerance", o.tolerance, "Iterate until the marginal residual is below");

  auto *correlate = app.add_subcommand("correlate", "Kendall tau between L_a + L_u and performance");
  correlate->add_option("--records", o.records, "Model records (CSV or JSON)")->required();
  correlate->add_option("--task", o.task, "Performance key (acc, ap, ...)");
  correlate->add_option("--filter", o.filter, "Tag filter, e.g. 'w_c=0,batch>=128'");
  add_common(correlate, o);

  auto *optimize = app.add_subcommand("optimize", "Projected gradient descent of free embeddings");
  optimize->add_option("--n", o.n, "Instances");
  optimize->add_option("--hw", o.hw, "Positions per view");
  optimize->add_option("--d", o.d, "Embedding dimension");
  optimize->add_option("--steps", o.steps, "Gradient steps");
  optimize->add_option("--lr", o.lr, "Step size");
  optimize->add_option("--noise", o.noise, "Initial view-b noise scale");
  optimize->add_option("--w-a", o.w_a, "Alignment weight");
  optimize->add_option("--w-u", o.w_u, "Uniformity weight");
  optimize->add_option("--w-c", o.w_c, "InfoNCE weight");
  optimize->add_option("--contrastive", o.contrastive, "dense or instance")
      ->check(CLI::IsMember({"dense", "instance"}));
  optimize->add_option("--export", o.export_path, "Write the final embeddings as a DCLF dump");
  add_common(optimize, o);
  add_loss(optimize, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    dcl_set_num_threads(o.threads);
    if (metrics->parsed())
      return cmd_metrics(o);
    if (match->parsed())
      return cmd_match(o);
    if (transport->parsed())
      return cmd_transport(o);
    if (correlate->parsed())
      return cmd_correlate(o);
    return cmd_optimize(o);
  } catch (const CliError &e) {
    std::cerr << kToolName << ": " << dcl_status_name(e.status()) << ": " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception &e) {
    std::cerr << kToolName << ": " << e.what() << "\n";
    return kExitError;
  }
}
