#include "dcl/dcl.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "dcl/dclf.hpp"
#include "dcl/error.hpp"
#include "dcl/losses.hpp"
#include "dcl/matching.hpp"
#include "dcl/parallel.hpp"
#include "dcl/rank_correlation.hpp"
#include "dcl/records.hpp"
#include "dcl/serialize.hpp"
#include "dcl/sphere_optimizer.hpp"

struct dcl_dump {
  dcl::FeatureDump dump;
};

struct dcl_assignment {
  dcl::PairAssignment pairs;
};

struct dcl_plan {
  dcl::TransportPlan plan;
};

struct dcl_records {
  std::vector<dcl::ModelRecord> records;
  std::string task;
};

struct dcl_correlation {
  dcl::CorrelationReport report;
};

struct dcl_optimizer {
  dcl::OptimState state;
};

namespace {

thread_local std::string last_error;

struct NullArgument {
  const char *name;
};

template <class F> dcl_status guarded(F &&body) {
  try {
    body();
    last_error.clear();
    return DCL_OK;
  } catch (const dcl::Error &e) {
    last_error = e.what();
    return static_cast<dcl_status>(static_cast<int>(e.code()));
  } catch (const NullArgument &e) {
    last_error = std::string("null argument: ") + e.name;
    return DCL_ERR_NULL_ARGUMENT;
  } catch (const std::bad_alloc &) {
    last_error = "out of memory";
    return DCL_ERR_INTERNAL;
  } catch (const std::exception &e) {
    last_error = e.what();
    return DCL_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return DCL_ERR_INTERNAL;
  }
}

template <class T> T &need(T *p, const char *name) {
  if (!p)
    throw NullArgument{name};
  return *p;
}

const char *text_arg(const char *p, const char *name) {
  if (!p)
    throw NullArgument{name};
  return p;
}

char *copy_string(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string dump_json(const nlohmann::json &j) { return j.dump(2) + "\n"; }

dcl::LossConfig to_config(const dcl_loss_config *c) {
  dcl::LossConfig cfg;
  if (!c)
    return cfg;
  cfg.temperature = c->temperature;
  cfg.kernel_t = c->kernel_t;
  if (c->include_positive == 0 || c->include_positive == 1)
    cfg.include_positive_in_denominator = c->include_positive == 1;
  else if (c->include_positive != -1)
    dcl::fail(dcl::ErrorCode::InvalidParameter, "include_positive must be -1, 0 or 1");
  switch (c->alignment) {
  case DCL_ALIGN_NEG_COSINE: cfg.alignment = dcl::AlignmentConvention::NegCosine; break;
  case DCL_ALIGN_SQ_DISTANCE: cfg.alignment = dcl::AlignmentConvention::SqDistance; break;
  default: dcl::fail(dcl::ErrorCode::InvalidParameter, "unknown alignment convention");
  }
  switch (c->uniformity_scope) {
  case DCL_UNIFORMITY_LITERAL: cfg.uniformity = dcl::UniformityScope::PositivePairsLiteral; break;
  case DCL_UNIFORMITY_ALL_PAIRS: cfg.uniformity = dcl::UniformityScope::InterInstanceAllPairs; break;
  default: dcl::fail(dcl::ErrorCode::InvalidParameter, "unknown uniformity scope");
  }
  if (c->pair_subsample == 0)
    cfg.pair_subsample.reset();
  else
    cfg.pair_subsample = c->pair_subsample;
  cfg.seed = c->seed;
  cfg.validate();
  return cfg;
}

dcl::ContrastiveVariant to_variant(int v) {
  switch (v) {
  case DCL_CONTRASTIVE_DENSE: return dcl::ContrastiveVariant::Dense;
  case DCL_CONTRASTIVE_INSTANCE: return dcl::ContrastiveVariant::Instance;
  default: dcl::fail(dcl::ErrorCode::InvalidParameter, "unknown contrastive variant");
  }
}

dcl::LossWeights to_weights(const dcl_loss_weights &w) { return {w.w_a, w.w_u, w.w_c}; }

dcl::SinkhornOptions to_options(const dcl_sinkhorn_params *p) {
  dcl::SinkhornOptions o;
  if (!p)
    return o;
  o.reg = p->reg;
  o.iterations = p->iterations;
  if (p->tolerance > 0.0)
    o.tolerance = p->tolerance;
  else if (p->tolerance < 0.0)
    dcl::fail(dcl::ErrorCode::InvalidParameter, "tolerance must not be negative");
  return o;
}

dcl::ViewPairBatch normalized_batch(const dcl_dump &d) {
  return dcl::l2_normalize(d.dump.to_batch());
}

std::vector<dcl::FeatureMap> normalized_view(const dcl_dump &d, std::size_t view) {
  auto maps = d.dump.view_maps(view);
  for (auto &m : maps)
    m = dcl::l2_normalize(m);
  return maps;
}

dcl_loss_report to_report(const dcl::LossReport &r) {
  return {r.value, r.alignment_term, r.distribution_term};
}

dcl_correlation_summary to_summary(const dcl::CorrelationReport &r) {
  return {r.tau, r.concordant, r.discordant, r.ties_x, r.ties_y, r.n};
}

} // namespace

extern "C" {

const char *dcl_version(void) { return DCL_VERSION; }

const char *dcl_status_name(dcl_status status) {
  switch (status) {
  case DCL_OK: return "ok";
  case DCL_ERR_NULL_ARGUMENT: return "null-argument";
  case DCL_ERR_INTERNAL: return "internal";
  default:
    if (status >= 1 && status <= 13)
      return dcl::error_code_name(static_cast<dcl::ErrorCode>(status));
    return "unknown";
  }
}

const char *dcl_last_error_message(void) { return last_error.c_str(); }

void dcl_string_free(char *s) { std::free(s); }

dcl_status dcl_digest_bytes(const void *bytes, size_t size, char **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    if (!bytes && size)
      throw NullArgument{"bytes"};
    *out = copy_string(dcl::fnv1a_hex({static_cast<const std::byte *>(bytes), size}));
  });
}

void dcl_set_num_threads(unsigned threads) { dcl::set_num_threads(threads); }
unsigned dcl_get_num_threads(void) { return dcl::num_threads(); }

// ---- dumps

dcl_status dcl_dump_read_file(const char *path, dcl_dump **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    auto d = std::make_unique<dcl_dump>(dcl_dump{dcl::read_dclf(text_arg(path, "path"))});
    *out = d.release();
  });
}

dcl_status dcl_dump_read_memory(const void *bytes, size_t size, dcl_dump **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    if (!bytes && size)
      throw NullArgument{"bytes"};
    const std::span<const std::byte> view(static_cast<const std::byte *>(bytes), size);
    auto d = std::make_unique<dcl_dump>(dcl_dump{dcl::decode_dclf(view)});
    *out = d.release();
  });
}

dcl_status dcl_dump_create(const dcl_shape *shape, const float *values, dcl_dump **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const dcl_shape &s = need(shape, "shape");
    dcl::FeatureDump dump;
    dump.instances = s.instances;
    dump.views = s.views;
    dump.dim = s.dim;
    dump.height = s.height;
    dump.width = s.width;
    if (dump.value_count() == 0)
      dcl::fail(dcl::ErrorCode::InvalidInput, "dump extents must be positive");
    need(values, "values");
    dump.values.assign(values, values + dump.value_count());
    *out = std::make_unique<dcl_dump>(dcl_dump{std::move(dump)}).release();
  });
}

dcl_status dcl_dump_write_file(const dcl_dump *dump, const char *path) {
  return guarded([&] { dcl::write_dclf(text_arg(path, "path"), need(dump, "dump").dump); });
}

dcl_status dcl_dump_get_shape(const dcl_dump *dump, dcl_shape *out) {
  return guarded([&] {
    const auto &d = need(dump, "dump").dump;
    need(out, "out") = {d.instances, d.views, d.dim, d.height, d.width};
  });
}

dcl_status dcl_dump_get_values(const dcl_dump *dump, float *values, size_t count) {
  return guarded([&] {
    const auto &d = need(dump, "dump").dump;
    need(values, "values");
    if (count != d.values.size())
      dcl::fail(dcl::ErrorCode::InvalidParameter,
                "value buffer holds " + std::to_string(count) + " floats, dump has " +
                    std::to_string(d.values.size()));
    std::memcpy(values, d.values.data(), count * sizeof(float));
  });
}

dcl_status dcl_dump_digest(const dcl_dump *dump, char **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const auto bytes = dcl::encode_dclf(need(dump, "dump").dump);
    *out = copy_string(dcl::fnv1a_hex(bytes));
  });
}

dcl_status dcl_dump_zero_columns(const dcl_dump *dump, uint64_t *out) {
  return guarded([&] {
    const auto &d = need(dump, "dump").dump;
    std::uint64_t total = 0;
    for (std::size_t v = 0; v < d.views; ++v)
      for (const auto &m : d.view_maps(v))
        total += dcl::count_degenerate_columns(m, 0.0);
    need(out, "out") = total;
  });
}

void dcl_dump_free(dcl_dump *dump) { delete dump; }

// ---- losses

void dcl_loss_config_init(dcl_loss_config *cfg) {
  if (!cfg)
    return;
  const dcl::LossConfig d;
  cfg->temperature = d.temperature;
  cfg->kernel_t = d.kernel_t;
  cfg->include_positive = -1;
  cfg->alignment = DCL_ALIGN_SQ_DISTANCE;
  cfg->uniformity_scope = DCL_UNIFORMITY_ALL_PAIRS;
  cfg->pair_subsample = *d.pair_subsample;
  cfg->seed = d.seed;
}

dcl_status dcl_alignment_loss(const dcl_dump *dump, const dcl_loss_config *cfg, double *out) {
  return guarded([&] {
    const auto c = to_config(cfg);
    need(out, "out") = dcl::alignment_loss(normalized_batch(need(dump, "dump")), c);
  });
}

dcl_status dcl_uniformity_loss(const dcl_dump *dump, const dcl_loss_config *cfg, double *out) {
  return guarded([&] {
    const auto c = to_config(cfg);
    const auto &d = need(dump, "dump");
    need(out, "out");
    if (d.dump.views == 2) {
      *out = dcl::uniformity_loss(normalized_batch(d), c);
    } else {
      if (c.uniformity == dcl::UniformityScope::PositivePairsLiteral)
        dcl::fail(dcl::ErrorCode::MissingView, "the literal uniformity scope needs two views");
      *out = dcl::uniformity_loss(normalized_view(d, 0), c);
    }
  });
}

dcl_status dcl_dense_info_nce(const dcl_dump *dump, const dcl_assignment *pairs,
                              const dcl_loss_config *cfg, dcl_loss_report *out) {
  return guarded([&] {
    const auto c = to_config(cfg);
    const auto batch = normalized_batch(need(dump, "dump"));
    need(out, "out");
    const auto r = pairs ? dcl::dense_info_nce(batch, pairs->pairs, c)
                         : dcl::dense_info_nce(batch, dcl::index_wise_pairs(batch), c);
    *out = to_report(r);
  });
}

dcl_status dcl_instance_info_nce(const dcl_dump *dump, const dcl_loss_config *cfg,
                                 dcl_loss_report *out) {
  return guarded([&] {
    const auto c = to_config(cfg);
    const auto pooled = dcl::pool_instances(normalized_batch(need(dump, "dump")));
    need(out, "out") = to_report(dcl::instance_info_nce(pooled, c));
  });
}

dcl_status dcl_loss_gradient(const dcl_dump *dump, int kind, const dcl_loss_weights *weights,
                             const dcl_assignment *pairs, const dcl_loss_config *cfg,
                             dcl_dump **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const auto c = to_config(cfg);
    const auto batch = normalized_batch(need(dump, "dump"));
    dcl::LossSelector sel;
    std::optional<dcl::PairAssignment> own;
    switch (kind) {
    case DCL_LOSS_ALIGNMENT: sel.kind = dcl::LossSelector::Kind::Alignment; break;
    case DCL_LOSS_UNIFORMITY: sel.kind = dcl::LossSelector::Kind::Uniformity; break;
    case DCL_LOSS_DENSE_INFO_NCE: sel.kind = dcl::LossSelector::Kind::DenseInfoNce; break;
    case DCL_LOSS_INSTANCE_INFO_NCE: sel.kind = dcl::LossSelector::Kind::InstanceInfoNce; break;
    case DCL_LOSS_COMBINED:
      sel.kind = dcl::LossSelector::Kind::Combined;
      sel.weights = to_weights(need(weights, "weights"));
      sel.variant = to_variant(weights->contrastive);
      break;
    default: dcl::fail(dcl::ErrorCode::InvalidParameter, "unknown loss kind");
    }
    if (pairs) {
      sel.pairs = &pairs->pairs;
    } else {
      own = dcl::index_wise_pairs(batch);
      sel.pairs = &*own;
    }
    const auto grad = dcl::loss_gradient(batch, sel, c);
    *out = std::make_unique<dcl_dump>(dcl_dump{dcl::FeatureDump::from_batch(grad)}).release();
  });
}

// ---- matching

void dcl_sinkhorn_params_init(dcl_sinkhorn_params *params) {
  if (!params)
    return;
  const dcl::SinkhornOptions d;
  params->reg = d.reg;
  params->iterations = static_cast<uint32_t>(d.iterations);
  params->tolerance = 0.0;
}

dcl_status dcl_match(const dcl_dump *dump, int strategy, const dcl_sinkhorn_params *params,
                     dcl_assignment **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const auto batch = need(dump, "dump").dump.to_batch();
    dcl::PairAssignment pa;
    switch (strategy) {
    case DCL_MATCH_INDEX: pa = dcl::index_wise_pairs(batch); break;
    case DCL_MATCH_COSINE: pa = dcl::cosine_argmax_pairs(batch); break;
    case DCL_MATCH_OT: pa = dcl::optimal_transport_pairs(batch, to_options(params)); break;
    default: dcl::fail(dcl::ErrorCode::InvalidParameter, "unknown matching strategy");
    }
    *out = std::make_unique<dcl_assignment>(dcl_assignment{std::move(pa)}).release();
  });
}

dcl_status dcl_assignment_get_info(const dcl_assignment *pairs, dcl_assignment_info *out) {
  return guarded([&] {
    const auto &p = need(pairs, "pairs").pairs;
    dcl_assignment_info &i = need(out, "out");
    i.strategy = static_cast<int>(p.strategy);
    i.instances = p.instances;
    i.positions = p.positions;
    i.positives = p.positives.size();
    i.negatives_per_anchor = p.negatives_per_anchor();
    i.cross_instance_pool = p.cross_instance_pool();
    i.symmetric = p.symmetric;
    i.exclude_own_view = p.policy.exclude_own_view;
    i.exclude_positive = p.policy.exclude_positive;
    i.same_pair_other_view = p.policy.same_pair_other_view;
    i.cross_instance = p.policy.cross_instance;
  });
}

dcl_status dcl_assignment_get_positive(const dcl_assignment *pairs, size_t index,
                                       uint32_t *instance, uint32_t *anchor,
                                       uint32_t *matched) {
  return guarded([&] {
    const auto &p = need(pairs, "pairs").pairs;
    if (index >= p.positives.size())
      dcl::fail(dcl::ErrorCode::InvalidParameter, "positive index out of range");
    const auto &pp = p.positives[index];
    need(instance, "instance") = pp.instance;
    need(anchor, "anchor") = pp.anchor;
    need(matched, "matched") = pp.matched;
  });
}

dcl_status dcl_assignment_to_csv(const dcl_assignment *pairs, char **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    *out = copy_string(need(pairs, "pairs").pairs.to_csv());
  });
}

dcl_status dcl_assignment_from_csv(const char *text, dcl_assignment **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    auto pa = dcl::PairAssignment::from_csv(text_arg(text, "text"));
    *out = std::make_unique<dcl_assignment>(dcl_assignment{std::move(pa)}).release();
  });
}

dcl_status dcl_assignment_to_json(const dcl_assignment *pairs, char **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    *out = copy_string(dump_json(dcl::to_json(need(pairs, "pairs").pairs)));
  });
}

void dcl_assignment_free(dcl_assignment *pairs) { delete pairs; }

dcl_status dcl_transport(const dcl_dump *dump, uint32_t instance,
                         const dcl_sinkhorn_params *params, dcl_plan **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const auto batch = need(dump, "dump").dump.to_batch();
    if (instance >= batch.size())
      dcl::fail(dcl::ErrorCode::InvalidParameter,
                "instance " + std::to_string(instance) + " out of range (N = " +
                    std::to_string(batch.size()) + ")");
    auto plan = dcl::instance_transport(batch[instance], to_options(params));
    *out = std::make_unique<dcl_plan>(dcl_plan{std::move(plan)}).release();
  });
}

dcl_status dcl_sinkhorn(const double *cost, uint32_t rows, uint32_t cols, const double *r,
                        const double *c, const dcl_sinkhorn_params *params, dcl_plan **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    need(cost, "cost");
    if (rows == 0 || cols == 0)
      dcl::fail(dcl::ErrorCode::InvalidInput, "cost matrix must be non-empty");
    if ((r == nullptr) != (c == nullptr))
      dcl::fail(dcl::ErrorCode::InvalidParameter, "give both marginals or neither");
    dcl::Matrix m(rows, cols);
    for (uint32_t i = 0; i < rows; ++i)
      for (uint32_t j = 0; j < cols; ++j)
        m(i, j) = cost[std::size_t{i} * cols + j];
    const auto opts = to_options(params);
    dcl::TransportPlan plan;
    if (r) {
      const dcl::Vector rv = Eigen::Map<const dcl::Vector>(r, rows);
      const dcl::Vector cv = Eigen::Map<const dcl::Vector>(c, cols);
      plan = dcl::sinkhorn_plan(m, rv, cv, opts);
    } else {
      plan = dcl::sinkhorn_plan(m, opts);
    }
    *out = std::make_unique<dcl_plan>(dcl_plan{std::move(plan)}).release();
  });
}

dcl_status dcl_plan_get_summary(const dcl_plan *plan, dcl_plan_summary *out) {
  return guarded([&] {
    const auto &p = need(plan, "plan").plan;
    need(out, "out") = {static_cast<uint64_t>(p.plan.rows()),
                        static_cast<uint64_t>(p.plan.cols()),
                        p.reg_strength,
                        p.ot_lambda,
                        p.iterations_run,
                        p.marginal_residual,
                        dcl::ot_distance(p)};
  });
}

dcl_status dcl_plan_get_entries(const dcl_plan *plan, double *values, size_t count) {
  return guarded([&] {
    const auto &p = need(plan, "plan").plan.plan;
    need(values, "values");
    if (count != static_cast<size_t>(p.size()))
      dcl::fail(dcl::ErrorCode::InvalidParameter, "entry buffer size does not match the plan");
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j)
        values[i * p.cols() + j] = p(i, j);
  });
}

dcl_status dcl_plan_to_json(const dcl_plan *plan, char **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const auto &p = need(plan, "plan").plan;
    const bool inline_matrices =
        static_cast<std::size_t>(std::max(p.plan.rows(), p.plan.cols())) <= dcl::kInlinePlanLimit;
    *out = copy_string(dump_json(dcl::to_json(p, inline_matrices)));
  });
}

dcl_status dcl_plans_write_sidecar(const dcl_plan *const *plans, size_t count, const char *path) {
  return guarded([&] {
    need(plans, "plans");
    text_arg(path, "path");
    if (count == 0)
      dcl::fail(dcl::ErrorCode::InvalidInput, "no plans to write");
    const auto &first = need(plans[0], "plans[0]").plan.plan;
    dcl::FeatureDump d;
    d.instances = static_cast<uint32_t>(count);
    d.views = 1;
    d.dim = 1;
    d.height = static_cast<uint32_t>(first.rows());
    d.width = static_cast<uint32_t>(first.cols());
    d.values.reserve(d.value_count());
    for (size_t k = 0; k < count; ++k) {
      const auto &p = need(plans[k], "plans[k]").plan.plan;
      if (p.rows() != first.rows() || p.cols() != first.cols())
        dcl::fail(dcl::ErrorCode::InvalidInput, "sidecar plans must share one shape");
      for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j)
          d.values.push_back(static_cast<float>(p(i, j)));
    }
    dcl::write_dclf(path, d);
  });
}

void dcl_plan_free(dcl_plan *plan) { delete plan; }

// ---- correlation

dcl_status dcl_records_load(const char *path, const char *task, dcl_records **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const std::string t = text_arg(task, "task");
    auto recs = dcl::load_records(text_arg(path, "path"), t);
    *out = std::make_unique<dcl_records>(dcl_records{std::move(recs), t}).release();
  });
}

dcl_status dcl_records_parse_csv(const char *text, const char *task, dcl_records **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const std::string t = text_arg(task, "task");
    auto recs = dcl::parse_records_csv(text_arg(text, "text"), t);
    *out = std::make_unique<dcl_records>(dcl_records{std::move(recs), t}).release();
  });
}

dcl_status dcl_records_filter(const dcl_records *records, const char *expr, dcl_records **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const auto &r = need(records, "records");
    auto kept = dcl::filter_records(r.records, text_arg(expr, "expr"));
    *out = std::make_unique<dcl_records>(dcl_records{std::move(kept), r.task}).release();
  });
}

dcl_status dcl_records_count(const dcl_records *records, uint64_t *out) {
  return guarded([&] { need(out, "out") = need(records, "records").records.size(); });
}

void dcl_records_free(dcl_records *records) { delete records; }

dcl_status dcl_kendall_tau_b(const double *x, const double *y, size_t n,
                             dcl_correlation_summary *out) {
  return guarded([&] {
    if (n) {
      need(x, "x");
      need(y, "y");
    }
    const auto r = dcl::kendall_tau_b(std::span<const double>(x, n), std::span<const double>(y, n));
    need(out, "out") = to_summary(r);
  });
}

dcl_status dcl_correlate(const dcl_records *records, const char *task, dcl_correlation **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    auto r = dcl::correlate_models(need(records, "records").records, text_arg(task, "task"));
    *out = std::make_unique<dcl_correlation>(dcl_correlation{std::move(r)}).release();
  });
}

dcl_status dcl_correlation_get_summary(const dcl_correlation *corr,
                                       dcl_correlation_summary *out) {
  return guarded([&] { need(out, "out") = to_summary(need(corr, "corr").report); });
}

dcl_status dcl_correlation_to_json(const dcl_correlation *corr, char **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    *out = copy_string(dump_json(dcl::to_json(need(corr, "corr").report)));
  });
}

dcl_status dcl_correlation_points_csv(const dcl_correlation *corr, char **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const auto &r = need(corr, "corr").report;
    dcl::CsvDocument doc;
    doc.comments = {"task=" + r.task, "tau=" + dcl::format_double(r.tau)};
    doc.header = {"id", "x", "y"};
    for (std::size_t k = 0; k < r.normalized_x.size(); ++k)
      doc.rows.push_back({k < r.ids.size() ? r.ids[k] : std::to_string(k),
                          dcl::format_double(r.normalized_x[k]),
                          dcl::format_double(r.normalized_y[k])});
    *out = copy_string(doc.format());
  });
}

void dcl_correlation_free(dcl_correlation *corr) { delete corr; }

// ---- optimizer

void dcl_optimizer_params_init(dcl_optimizer_params *params) {
  if (!params)
    return;
  params->instances = 64;
  params->positions = 1;
  params->dim = 8;
  params->seed = 0;
  params->noise = dcl::kDefaultViewNoise;
  params->lr = 0.05;
}

dcl_status dcl_optimizer_create(const dcl_optimizer_params *params, dcl_optimizer **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const auto &p = need(params, "params");
    auto state = dcl::init_random(p.instances, p.positions, p.dim, p.seed, p.noise, p.lr);
    *out = std::make_unique<dcl_optimizer>(dcl_optimizer{std::move(state)}).release();
  });
}

dcl_status dcl_optimizer_run(dcl_optimizer *opt, uint32_t steps, const dcl_loss_weights *weights,
                             const dcl_loss_config *cfg) {
  return guarded([&] {
    auto &o = need(opt, "opt");
    const auto &w = need(weights, "weights");
    const auto c = to_config(cfg);
    o.state = dcl::run(std::move(o.state), steps, to_weights(w), c, to_variant(w.contrastive));
  });
}

dcl_status dcl_optimizer_history_size(const dcl_optimizer *opt, uint64_t *out) {
  return guarded([&] { need(out, "out") = need(opt, "opt").state.history.size(); });
}

dcl_status dcl_optimizer_history_entry(const dcl_optimizer *opt, size_t index, uint64_t *step,
                                       double *l_a, double *l_u, double *loss) {
  return guarded([&] {
    const auto &h = need(opt, "opt").state.history;
    if (index >= h.size())
      dcl::fail(dcl::ErrorCode::InvalidParameter, "history index out of range");
    if (step) *step = h[index].step;
    if (l_a) *l_a = h[index].l_a;
    if (l_u) *l_u = h[index].l_u;
    if (loss) *loss = h[index].loss;
  });
}

dcl_status dcl_optimizer_history_csv(const dcl_optimizer *opt, char **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    *out = copy_string(dcl::history_csv(need(opt, "opt").state.history));
  });
}

dcl_status dcl_optimizer_mean_positive_cosine(const dcl_optimizer *opt, double *out) {
  return guarded(
      [&] { need(out, "out") = dcl::mean_positive_cosine(need(opt, "opt").state.embeddings); });
}

dcl_status dcl_optimizer_export(const dcl_optimizer *opt, dcl_dump **out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    auto d = dcl::FeatureDump::from_batch(need(opt, "opt").state.embeddings);
    *out = std::make_unique<dcl_dump>(dcl_dump{std::move(d)}).release();
  });
}

void dcl_optimizer_free(dcl_optimizer *opt) { delete opt; }

} // extern "C"
