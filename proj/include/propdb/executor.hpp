#pragma once

#include "propdb/model.hpp"
#include "propdb/optimizer.hpp"
#include "propdb/plan.hpp"
#include "propdb/query.hpp"

#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace propdb {

using ValueTuple = std::vector<Constant>;

struct AnswerTable {
    /// Variable ids; a plan result lists them in increasing order.
    std::vector<int> columns;
    std::map<ValueTuple, Probability> rows;

    /// Score of `key`, 0 when absent.
    Probability score(const ValueTuple& key) const;
};

/// 1 - prod(1 - p_i), accumulated in log space. Throws UsageError on inputs
/// outside [0,1].
Probability ior(std::span<const Probability> probs);
Probability ior(std::initializer_list<Probability> probs);

using ViewTables = std::vector<AnswerTable>;

/// Extensional evaluation. A Boolean plan always yields exactly one row.
AnswerTable eval_plan(const Query& q, const Plan& p, const Database& db, const ViewTables* views = nullptr);
AnswerTable eval_views(const Query& q, const ViewSet& vs, const Database& db);

/// Per-row minimum; rows missing from a table count as 0.
AnswerTable min_tables(const std::vector<AnswerTable>& tables);

/// Reorders columns to `order` (a permutation of table.columns).
AnswerTable reorder(const AnswerTable& t, const std::vector<int>& order);

enum class Pipeline { None, Single, Views, Semijoin, All };
Pipeline parse_pipeline(std::string_view name);
std::string_view pipeline_name(Pipeline p);

/// Propagation score per answer, columns in the query's head order.
AnswerTable propagation_score(const Query& q, const Database& db, Pipeline opt = Pipeline::None);

/// Shortest decimal text that reads back to the same double.
std::string format_score(double p);

/// Head columns then `score`, by score descending, ties by value tuple.
std::string answers_tsv(const Query& q, const AnswerTable& t);
std::vector<std::pair<ValueTuple, Probability>> ranked_rows(const AnswerTable& t);

} // namespace propdb
