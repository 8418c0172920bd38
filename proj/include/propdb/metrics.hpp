#pragma once

#include "propdb/executor.hpp"
#include "propdb/model.hpp"
#include "propdb/query.hpp"

#include <set>
#include <utility>
#include <vector>

namespace propdb {

struct Ranking {
    std::vector<std::pair<ValueTuple, double>> items;
    std::set<ValueTuple> relevant;
};

Ranking ranking_from(const AnswerTable& t, std::set<ValueTuple> relevant = {});

/// Expected AP@k when items with equal scores appear in uniformly random
/// order; the normalizer is min(k, |relevant|).
double ap_at_k(const Ranking& rk, int k);
double map_over(const std::vector<Ranking>& rankings, int k);

/// Top-k answers of `t`; answers tied with the k-th are all included.
std::set<ValueTuple> top_k_answers(const AnswerTable& t, int k);

/// Score of each answer = number of clauses in its lineage.
Ranking rank_by_lineage_size(const Query& q, const Database& db);

} // namespace propdb
