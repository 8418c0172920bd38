#include "propdb/planner.hpp"

#include "propdb/dissociation.hpp"
#include "propdb/error.hpp"
#include "propdb/model.hpp"

namespace propdb {

PlanShape plain_shape(const Query& q) {
    PlanShape s;
    s.vars = q.atom_vars();
    s.det.assign(q.atoms.size(), false);
    return s;
}

PlanShape det_shape(const Query& q, const Database& db) {
    PlanShape s = plain_shape(q);
    for (int i = 0; i < q.atom_count(); ++i) s.det[i] = db.relation(q.atoms[i].relation).deterministic;
    s.use_det = true;
    return s;
}

std::vector<VarSet> fd_added_vars(const Query& q, const Database& db) {
    std::vector<VarSet> added(q.atoms.size());
    const VarSet ev = q.evars();
    for (const auto& fd : db.fds()) {
        const int j = q.atom_index(fd.relation);
        if (j < 0) continue;
        const auto& rel = db.relation(fd.relation);
        auto bind = [&](const std::vector<std::string>& attrs) {
            VarSet s;
            for (const auto& a : attrs) {
                const int pos = rel.attribute_index(a);
                if (pos >= 0 && q.atoms[j].args[pos].is_var()) s.insert(q.atoms[j].args[pos].var);
            }
            return s;
        };
        const VarSet lhs = bind(fd.determinant);
        const VarSet rhs = bind(fd.dependent);
        // a determinant made of head variables only is a constant per answer
        if (lhs.subset_of(q.head_set())) continue;
        for (int i = 0; i < q.atom_count(); ++i)
            if (lhs.subset_of(q.atoms[i].vars)) added[i] |= (rhs - q.atoms[i].vars) & ev;
    }
    return added;
}

PlanShape fd_shape(const Query& q, const Database& db) {
    PlanShape s = det_shape(q, db);
    const auto added = fd_added_vars(q, db);
    for (int i = 0; i < q.atom_count(); ++i) s.vars[i] |= added[i];
    return s;
}

PlanSpace::PlanSpace(const Query& q, PlanShape shape) : q_(q), shape_(std::move(shape)) {
    root_ = build(q_.all_atoms(), q_.head_set());
}

int PlanSpace::build(AtomSet atoms, VarSet head) {
    const VarSet all = vars_of(shape_.vars, atoms);
    head &= all;
    const auto key = std::make_pair(atoms.mask(), head.mask());
    if (auto it = index_.find(key); it != index_.end()) return it->second;

    Node n;
    n.atoms = atoms;
    n.head = head;
    n.evars = all - head;
    if (atoms.size() == 1) {
        n.kind = Kind::Leaf;
    } else if (auto comps = components(shape_.vars, atoms, head); comps.size() > 1) {
        n.kind = Kind::Split;
        for (auto c : comps) n.parts.push_back(build(c, head & vars_of(shape_.vars, c)));
    } else {
        n.kind = Kind::Choice;
        std::optional<VarSet> sep;
        if (shape_.use_det) {
            VarSet z = n.evars;
            atoms.for_each([&](int i) {
                if (!shape_.det[i]) z &= shape_.vars[i];
            });
            if (!z.empty()) sep = z;
        }
        if (sep) {
            const VarSet z = *sep;
            if (components(shape_.vars, atoms, head | z).size() > 1) {
                n.options.emplace_back(z, build(atoms, head | z));
            } else {
                for (auto y : top_sets(shape_.vars, atoms, head | z))
                    n.options.emplace_back(z | y, build(atoms, head | z | y));
            }
        } else {
            for (auto y : top_sets(shape_.vars, atoms, head)) n.options.emplace_back(y, build(atoms, head | y));
        }
    }
    nodes_.push_back(std::move(n));
    const int id = static_cast<int>(nodes_.size()) - 1;
    index_.emplace(key, id);
    return id;
}

Plan PlanSpace::leaf_plan(int id) const {
    const auto& n = nodes_[id];
    return make_project(q_, n.evars, make_scan(q_, n.atoms.first()));
}

const std::vector<Plan>& PlanSpace::plans(int id) {
    if (auto it = plans_.find(id); it != plans_.end()) return it->second;
    const Node n = nodes_[id];
    std::vector<Plan> out;
    switch (n.kind) {
    case Kind::Leaf:
        out.push_back(leaf_plan(id));
        break;
    case Kind::Split: {
        std::vector<std::vector<Plan>> combos{{}};
        for (int part : n.parts) {
            const auto& sub = plans(part);
            std::vector<std::vector<Plan>> next;
            for (const auto& prefix : combos)
                for (const auto& p : sub) {
                    next.push_back(prefix);
                    next.back().push_back(p);
                }
            combos = std::move(next);
        }
        for (auto& c : combos) out.push_back(make_join(q_, std::move(c)));
        break;
    }
    case Kind::Choice:
        for (const auto& [away, child] : n.options)
            for (const auto& p : plans(child)) out.push_back(make_project(q_, away, p));
        break;
    }
    return plans_[id] = dedupe(out);
}

Plan PlanSpace::single(int id) {
    if (auto it = single_.find(id); it != single_.end()) return it->second;
    const Node n = nodes_[id];
    Plan p;
    switch (n.kind) {
    case Kind::Leaf:
        p = leaf_plan(id);
        break;
    case Kind::Split: {
        std::vector<Plan> parts;
        for (int part : n.parts) parts.push_back(single(part));
        p = make_join(q_, std::move(parts));
        break;
    }
    case Kind::Choice: {
        std::vector<Plan> alts;
        for (const auto& [away, child] : n.options) alts.push_back(make_project(q_, away, single(child)));
        p = make_min(q_, std::move(alts));
        break;
    }
    }
    return single_[id] = p;
}

std::optional<Plan> safe_plan(const Query& q) {
    if (!is_hierarchical(q)) return std::nullopt;
    PlanSpace space(q, plain_shape(q));
    return space.plans(space.root()).front();
}

std::vector<Plan> enumerate_minimal_plans(const Query& q) {
    PlanSpace space(q, plain_shape(q));
    return space.plans(space.root());
}

std::vector<Plan> enumerate_plans_det(const Query& q, const Database& db) {
    PlanSpace space(q, det_shape(q, db));
    return space.plans(space.root());
}

std::vector<Plan> enumerate_plans_fd(const Query& q, const Database& db) {
    PlanSpace space(q, fd_shape(q, db));
    return space.plans(space.root());
}

long long count_safe_dissociations(const Query& q) {
    const auto slots = dissociation_slots(q);
    if (slots.size() > 20) throw UsageError("dissociation lattice too large (" + std::to_string(slots.size()) +
                                            " free positions, limit 20)");
    long long n = 0;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << slots.size()); ++m)
        if (is_safe_dissociation(q, dissociation_from_mask(q, slots, m))) ++n;
    return n;
}

} // namespace propdb
