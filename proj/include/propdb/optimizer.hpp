#pragma once

#include "propdb/model.hpp"
#include "propdb/plan.hpp"
#include "propdb/query.hpp"

#include <string>
#include <utility>
#include <vector>

namespace propdb {

/// With a database, FDs and deterministic tables shape the plan exactly as
/// in enumerate_plans_fd; without, the plain enumeration is used.
Plan single_plan(const Query& q, const Database* db = nullptr);

struct ViewSet {
    /// Definitions in evaluation order; a view only references earlier ones.
    std::vector<Plan> views;
    Plan main;

    std::string render(const Query& q) const;
};

ViewSet common_subplans(const Query& q, const Database* db = nullptr);

/// Keeps only tuples that take part in some answer of the full join of the
/// query body. Relation names and tuple ids are preserved, so the query is
/// returned unchanged.
std::pair<Database, Query> semijoin_reduce(const Query& q, const Database& db);

} // namespace propdb
