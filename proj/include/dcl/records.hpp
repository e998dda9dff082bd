#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dcl/rank_correlation.hpp"

namespace dcl {

/// Loads model records for one downstream task.
///
/// CSV input uses the columns id, batch, lr, w_a, w_u, w_c, tau_temp,
/// la_inst, lu_inst, acc, la_dense, lu_dense, ap. Lines starting with '#'
/// are comments. The task picks the evaluation aspect: acc pairs with the
/// instance-level columns, ap with the dense-level ones. The remaining
/// pretraining columns become tags.
///
/// JSON input is an array of {id, l_a, l_u, performance: {...}, tags: {...}}.
std::vector<ModelRecord> parse_records_csv(std::string_view text, const std::string &task);
std::vector<ModelRecord> parse_records_json(std::string_view text, const std::string &task);
/// Dispatches on the extension (.json, anything else is CSV).
std::vector<ModelRecord> load_records(const std::string &path, const std::string &task);

/// Keeps the records whose tags satisfy every clause of `expr`. Clauses are
/// separated by ',' or "&&" and read `key op value` with op one of
/// = == != < <= > >=. Values compare numerically when both sides parse as
/// numbers. An empty expression keeps everything.
std::vector<ModelRecord> filter_records(const std::vector<ModelRecord> &records,
                                        std::string_view expr);

} // namespace dcl
