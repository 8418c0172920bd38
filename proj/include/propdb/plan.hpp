#pragma once

#include "propdb/bitset.hpp"
#include "propdb/query.hpp"

#include <memory>
#include <string>
#include <vector>

namespace propdb {

enum class PlanKind { Scan, Project, Join, Min, View };

struct PlanNode;
using Plan = std::shared_ptr<const PlanNode>;

/// Immutable plan tree. `head` is computed over the atoms' own variables, so
/// variables added by a dissociation never show up in a plan.
struct PlanNode {
    PlanKind kind = PlanKind::Scan;
    int atom = -1;
    VarSet away;
    std::vector<Plan> children;
    int view = -1;
    VarSet head;
    AtomSet atoms;
    std::string text;
};

// Builders keep plans canonical: projections drop variables the child does
// not carry (and vanish when nothing is left), joins are flattened and their
// children sorted, a join or min of one child is that child.
Plan make_scan(const Query& q, int atom);
Plan make_project(const Query& q, VarSet away, Plan child);
Plan make_join(const Query& q, std::vector<Plan> children);
Plan make_min(const Query& q, std::vector<Plan> children);
Plan make_view_ref(const Query& q, int view, VarSet head, AtomSet atoms);

std::string view_name(int view);

/// Distinct plans by text, first occurrence kept.
std::vector<Plan> dedupe(const std::vector<Plan>& plans);

int count_nodes(const Plan& p, PlanKind kind);

} // namespace propdb
