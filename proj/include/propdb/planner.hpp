#pragma once

#include "propdb/plan.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace propdb {

class Database;

/// What the planner sees of each atom: its variables (possibly extended by a
/// dissociation) and whether it is deterministic.
struct PlanShape {
    std::vector<VarSet> vars;
    std::vector<bool> det;
    bool use_det = false;
};

PlanShape plain_shape(const Query& q);
PlanShape det_shape(const Query& q, const Database& db);
/// Variables each atom gains from the FDs of `db` (existential ones only).
std::vector<VarSet> fd_added_vars(const Query& q, const Database& db);
PlanShape fd_shape(const Query& q, const Database& db);

/// The recursion of the enumeration algorithms, memoized on (atoms, head).
/// A Leaf is a single atom, a Split a disconnected query, a Choice a
/// connected query with one option per admissible projection.
class PlanSpace {
public:
    enum class Kind { Leaf, Split, Choice };
    struct Node {
        Kind kind = Kind::Leaf;
        AtomSet atoms;
        VarSet head;
        VarSet evars;
        std::vector<int> parts;
        std::vector<std::pair<VarSet, int>> options;
    };

    PlanSpace(const Query& q, PlanShape shape);

    const Query& query() const { return q_; }
    int root() const { return root_; }
    const Node& node(int id) const { return nodes_[id]; }
    int size() const { return static_cast<int>(nodes_.size()); }

    /// Every plan below `id` (deduplicated, generation order).
    const std::vector<Plan>& plans(int id);
    /// One plan with a Min node wherever a Choice has several options.
    Plan single(int id);
    Plan leaf_plan(int id) const;

private:
    int build(AtomSet atoms, VarSet head);

    Query q_;
    PlanShape shape_;
    std::vector<Node> nodes_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, int> index_;
    std::map<int, std::vector<Plan>> plans_;
    std::map<int, Plan> single_;
    int root_ = -1;
};

std::optional<Plan> safe_plan(const Query& q);
std::vector<Plan> enumerate_minimal_plans(const Query& q);
std::vector<Plan> enumerate_plans_det(const Query& q, const Database& db);
std::vector<Plan> enumerate_plans_fd(const Query& q, const Database& db);

/// Number of safe elements of the dissociation lattice. Throws UsageError
/// above 20 free positions.
long long count_safe_dissociations(const Query& q);

} // namespace propdb
