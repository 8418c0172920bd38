#pragma once

#include "propdb/model.hpp"
#include "propdb/plan.hpp"
#include "propdb/query.hpp"

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace propdb {

/// Per-atom sets of added variables, aligned with Query::atoms.
struct Dissociation {
    std::vector<VarSet> added;

    bool operator==(const Dissociation&) const = default;
    int rank() const;
};

Dissociation empty_dissociation(const Query& q);
/// Throws UsageError unless each added set avoids the atom's own variables
/// and stays within Var(q).
void check_dissociation(const Query& q, const Dissociation& d);

/// Atom i becomes R~y(x_i, y_i) with the added variables appended.
Query dissociate_query(const Query& q, const Dissociation& d);

/// Cross product of `rel` with the active domain once per new attribute.
/// Copies keep the tuple probability and get fresh ids from `next_id`; with
/// no new attributes the relation is returned unchanged. `allowed`, when
/// given, restricts each new column to a subset of the domain.
RelationDef dissociate_table(const RelationDef& rel, const std::vector<std::string>& new_attributes,
                             const Database& db, TupleId& next_id,
                             const std::vector<std::set<Constant>>* allowed = nullptr);

struct DissociatedInstance {
    Query query;
    Database db;
};

/// Builds q^d together with D^d. With `prune`, an added variable only ranges
/// over values that occur in every column it binds in the original query.
DissociatedInstance dissociate_instance(const Query& q, const Database& db, const Dissociation& d,
                                        bool prune = false);

/// d1 <= d2 in the dissociation order (d2 dissociates at least as much).
bool partial_order_leq(const Dissociation& d1, const Dissociation& d2);
bool is_safe_dissociation(const Query& q, const Dissociation& d);

Dissociation plan_to_dissociation(const Query& q, const Plan& p);
Plan dissociation_to_plan(const Query& q, const Dissociation& d);

/// Positions (atom, existential variable) a dissociation may add.
std::vector<std::pair<int, int>> dissociation_slots(const Query& q);
Dissociation dissociation_from_mask(const Query& q, const std::vector<std::pair<int, int>>& slots,
                                    std::uint64_t mask);

} // namespace propdb
