/* C interface to the dense contrastive analysis library.
 *
 * Every object is an opaque handle released with its *_free function.
 * Functions return DCL_OK or an error status; the message for the most
 * recent failure on the calling thread is available from
 * dcl_last_error_message(). Strings returned through char** out-parameters
 * are owned by the caller and released with dcl_string_free(). */
#ifndef DCL_DCL_H
#define DCL_DCL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DCL_API __declspec(dllexport)
#else
#define DCL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dcl_status {
  DCL_OK = 0,
  DCL_ERR_INVALID_INPUT = 1,
  DCL_ERR_INVALID_PARAMETER = 2,
  DCL_ERR_DEGENERATE_INPUT = 3,
  DCL_ERR_INSUFFICIENT_BATCH = 4,
  DCL_ERR_INSUFFICIENT_INPUT = 5,
  DCL_ERR_NUMERICAL = 6,
  DCL_ERR_INVALID_STATE = 7,
  DCL_ERR_UNDEFINED_CORRELATION = 8,
  DCL_ERR_SCHEMA = 9,
  DCL_ERR_PARSE = 10,
  DCL_ERR_IO = 11,
  DCL_ERR_MISSING_VIEW = 12,
  DCL_ERR_DIVERGENCE = 13,
  DCL_ERR_NULL_ARGUMENT = 98,
  DCL_ERR_INTERNAL = 99
} dcl_status;

DCL_API const char *dcl_version(void);
DCL_API const char *dcl_status_name(dcl_status status);
DCL_API const char *dcl_last_error_message(void);
DCL_API void dcl_string_free(char *s);
/* FNV-1a digest of an arbitrary buffer, 16 hex digits. */
DCL_API dcl_status dcl_digest_bytes(const void *bytes, size_t size, char **out);

/* 0 selects hardware concurrency. Results do not depend on this value. */
DCL_API void dcl_set_num_threads(unsigned threads);
DCL_API unsigned dcl_get_num_threads(void);

/* ---- feature dumps (DCLF v1) ------------------------------------------ */

typedef struct dcl_dump dcl_dump;

typedef struct dcl_shape {
  uint32_t instances;
  uint32_t views;
  uint32_t dim;
  uint32_t height;
  uint32_t width;
} dcl_shape;

DCL_API dcl_status dcl_dump_read_file(const char *path, dcl_dump **out);
DCL_API dcl_status dcl_dump_read_memory(const void *bytes, size_t size, dcl_dump **out);
/* values: N*V*d*H*W floats in [instance][view][channel][row][col] order. */
DCL_API dcl_status dcl_dump_create(const dcl_shape *shape, const float *values,
                                   dcl_dump **out);
DCL_API dcl_status dcl_dump_write_file(const dcl_dump *dump, const char *path);
DCL_API dcl_status dcl_dump_get_shape(const dcl_dump *dump, dcl_shape *out);
/* Copies dcl_dump_get_shape's N*V*d*H*W values into `values`. */
DCL_API dcl_status dcl_dump_get_values(const dcl_dump *dump, float *values, size_t count);
/* FNV-1a digest of the encoded dump, 16 hex digits. */
DCL_API dcl_status dcl_dump_digest(const dcl_dump *dump, char **out);
/* Columns with zero norm, which normalization leaves at zero. */
DCL_API dcl_status dcl_dump_zero_columns(const dcl_dump *dump, uint64_t *out);
DCL_API void dcl_dump_free(dcl_dump *dump);

/* ---- losses ----------------------------------------------------------- */

typedef enum dcl_alignment_convention {
  DCL_ALIGN_NEG_COSINE = 0,
  DCL_ALIGN_SQ_DISTANCE = 1
} dcl_alignment_convention;

typedef enum dcl_uniformity_scope {
  DCL_UNIFORMITY_LITERAL = 0,
  DCL_UNIFORMITY_ALL_PAIRS = 1
} dcl_uniformity_scope;

typedef enum dcl_contrastive_variant {
  DCL_CONTRASTIVE_DENSE = 0,
  DCL_CONTRASTIVE_INSTANCE = 1
} dcl_contrastive_variant;

typedef struct dcl_loss_config {
  double temperature;
  double kernel_t;
  int include_positive;       /* -1: per-loss default, 0: no, 1: yes */
  int alignment;              /* dcl_alignment_convention */
  int uniformity_scope;       /* dcl_uniformity_scope */
  uint64_t pair_subsample;    /* 0: no cap */
  uint64_t seed;
} dcl_loss_config;

DCL_API void dcl_loss_config_init(dcl_loss_config *cfg);

typedef struct dcl_loss_report {
  double value;
  double alignment_term;
  double distribution_term;
} dcl_loss_report;

/* The dump-based loss functions normalize features first. Alignment and
 * the dense loss need V = 2; uniformity uses view 0 when V = 1. */
DCL_API dcl_status dcl_alignment_loss(const dcl_dump *dump, const dcl_loss_config *cfg,
                                      double *out);
DCL_API dcl_status dcl_uniformity_loss(const dcl_dump *dump, const dcl_loss_config *cfg,
                                       double *out);

typedef struct dcl_assignment dcl_assignment;

/* pairs may be NULL for index-wise matching. */
DCL_API dcl_status dcl_dense_info_nce(const dcl_dump *dump, const dcl_assignment *pairs,
                                      const dcl_loss_config *cfg, dcl_loss_report *out);
/* InfoNCE on spatially pooled, re-normalized features. */
DCL_API dcl_status dcl_instance_info_nce(const dcl_dump *dump, const dcl_loss_config *cfg,
                                         dcl_loss_report *out);

typedef enum dcl_loss_kind {
  DCL_LOSS_ALIGNMENT = 0,
  DCL_LOSS_UNIFORMITY = 1,
  DCL_LOSS_DENSE_INFO_NCE = 2,
  DCL_LOSS_INSTANCE_INFO_NCE = 3,
  DCL_LOSS_COMBINED = 4
} dcl_loss_kind;

typedef struct dcl_loss_weights {
  double w_a;
  double w_u;
  double w_c;
  int contrastive; /* dcl_contrastive_variant */
} dcl_loss_weights;

/* Gradient with respect to the normalized features, returned as a dump of
 * the same shape. weights are read for DCL_LOSS_COMBINED only. */
DCL_API dcl_status dcl_loss_gradient(const dcl_dump *dump, int kind,
                                     const dcl_loss_weights *weights,
                                     const dcl_assignment *pairs,
                                     const dcl_loss_config *cfg, dcl_dump **out);

/* ---- dense matching --------------------------------------------------- */

typedef enum dcl_matching {
  DCL_MATCH_INDEX = 0,
  DCL_MATCH_COSINE = 1,
  DCL_MATCH_OT = 2
} dcl_matching;

typedef struct dcl_sinkhorn_params {
  double reg;          /* entropic regularization E (kernel sharpness 1/E) */
  uint32_t iterations; /* fixed count, or the cap when tolerance > 0 */
  double tolerance;    /* > 0: iterate until the marginal residual is below */
} dcl_sinkhorn_params;

DCL_API void dcl_sinkhorn_params_init(dcl_sinkhorn_params *params);

typedef struct dcl_assignment_info {
  int strategy; /* dcl_matching */
  uint64_t instances;
  uint64_t positions;
  uint64_t positives;
  uint64_t negatives_per_anchor;
  uint64_t cross_instance_pool;
  int symmetric;
  int exclude_own_view;
  int exclude_positive;
  int same_pair_other_view;
  int cross_instance;
} dcl_assignment_info;

/* params is read for DCL_MATCH_OT only and may be NULL otherwise. */
DCL_API dcl_status dcl_match(const dcl_dump *dump, int strategy,
                             const dcl_sinkhorn_params *params, dcl_assignment **out);
DCL_API dcl_status dcl_assignment_get_info(const dcl_assignment *pairs,
                                           dcl_assignment_info *out);
DCL_API dcl_status dcl_assignment_get_positive(const dcl_assignment *pairs, size_t index,
                                               uint32_t *instance, uint32_t *anchor,
                                               uint32_t *matched);
DCL_API dcl_status dcl_assignment_to_csv(const dcl_assignment *pairs, char **out);
DCL_API dcl_status dcl_assignment_from_csv(const char *text, dcl_assignment **out);
DCL_API dcl_status dcl_assignment_to_json(const dcl_assignment *pairs, char **out);
DCL_API void dcl_assignment_free(dcl_assignment *pairs);

typedef struct dcl_plan dcl_plan;

typedef struct dcl_plan_summary {
  uint64_t rows;
  uint64_t cols;
  double reg_strength;
  double ot_lambda;
  uint64_t iterations_run;
  double marginal_residual;
  double ot_distance;
} dcl_plan_summary;

/* Sinkhorn plan between the two views of one instance, uniform marginals. */
DCL_API dcl_status dcl_transport(const dcl_dump *dump, uint32_t instance,
                                 const dcl_sinkhorn_params *params, dcl_plan **out);
/* cost: rows*cols row-major; r (rows) and c (cols) may both be NULL for
 * uniform marginals. */
DCL_API dcl_status dcl_sinkhorn(const double *cost, uint32_t rows, uint32_t cols,
                                const double *r, const double *c,
                                const dcl_sinkhorn_params *params, dcl_plan **out);
DCL_API dcl_status dcl_plan_get_summary(const dcl_plan *plan, dcl_plan_summary *out);
/* Row-major rows*cols copy of the plan. */
DCL_API dcl_status dcl_plan_get_entries(const dcl_plan *plan, double *values, size_t count);
/* Matrices are inlined only for plans of at most 64 x 64. */
DCL_API dcl_status dcl_plan_to_json(const dcl_plan *plan, char **out);
/* Writes plans as a DCLF dump with N = count, V = 1, d = 1, H = rows, W = cols. */
DCL_API dcl_status dcl_plans_write_sidecar(const dcl_plan *const *plans, size_t count,
                                           const char *path);
DCL_API void dcl_plan_free(dcl_plan *plan);

/* ---- rank correlation ------------------------------------------------- */

typedef struct dcl_records dcl_records;
typedef struct dcl_correlation dcl_correlation;

typedef struct dcl_correlation_summary {
  double tau;
  uint64_t concordant;
  uint64_t discordant;
  uint64_t ties_x;
  uint64_t ties_y;
  uint64_t n;
} dcl_correlation_summary;

/* Loads records for `task` (see the records format); CSV or JSON by extension. */
DCL_API dcl_status dcl_records_load(const char *path, const char *task, dcl_records **out);
DCL_API dcl_status dcl_records_parse_csv(const char *text, const char *task,
                                         dcl_records **out);
/* New record set holding the records that satisfy `expr`. */
DCL_API dcl_status dcl_records_filter(const dcl_records *records, const char *expr,
                                      dcl_records **out);
DCL_API dcl_status dcl_records_count(const dcl_records *records, uint64_t *out);
DCL_API void dcl_records_free(dcl_records *records);

DCL_API dcl_status dcl_kendall_tau_b(const double *x, const double *y, size_t n,
                                     dcl_correlation_summary *out);
DCL_API dcl_status dcl_correlate(const dcl_records *records, const char *task,
                                 dcl_correlation **out);
DCL_API dcl_status dcl_correlation_get_summary(const dcl_correlation *corr,
                                               dcl_correlation_summary *out);
/* {tau, P, Q, T, U, n, task, points: [{x, y, id}], warnings} */
DCL_API dcl_status dcl_correlation_to_json(const dcl_correlation *corr, char **out);
/* Scatter points as CSV rows id,x,y. */
DCL_API dcl_status dcl_correlation_points_csv(const dcl_correlation *corr, char **out);
DCL_API void dcl_correlation_free(dcl_correlation *corr);

/* ---- sphere optimizer ------------------------------------------------- */

typedef struct dcl_optimizer dcl_optimizer;

typedef struct dcl_optimizer_params {
  uint32_t instances;
  uint32_t positions;
  uint32_t dim;
  uint64_t seed;
  double noise;
  double lr;
} dcl_optimizer_params;

DCL_API void dcl_optimizer_params_init(dcl_optimizer_params *params);
DCL_API dcl_status dcl_optimizer_create(const dcl_optimizer_params *params,
                                        dcl_optimizer **out);
DCL_API dcl_status dcl_optimizer_run(dcl_optimizer *opt, uint32_t steps,
                                     const dcl_loss_weights *weights,
                                     const dcl_loss_config *cfg);
DCL_API dcl_status dcl_optimizer_history_size(const dcl_optimizer *opt, uint64_t *out);
DCL_API dcl_status dcl_optimizer_history_entry(const dcl_optimizer *opt, size_t index,
                                               uint64_t *step, double *l_a, double *l_u,
                                               double *loss);
/* CSV: step,l_a,l_u,loss */
DCL_API dcl_status dcl_optimizer_history_csv(const dcl_optimizer *opt, char **out);
DCL_API dcl_status dcl_optimizer_mean_positive_cosine(const dcl_optimizer *opt, double *out);
DCL_API dcl_status dcl_optimizer_export(const dcl_optimizer *opt, dcl_dump **out);
DCL_API void dcl_optimizer_free(dcl_optimizer *opt);

#ifdef __cplusplus
}
#endif

#endif /* DCL_DCL_H */
