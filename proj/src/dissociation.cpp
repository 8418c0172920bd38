#include "propdb/dissociation.hpp"

#include "propdb/error.hpp"
#include "propdb/planner.hpp"

#include <algorithm>
#include <iterator>
#include <optional>

namespace propdb {

int Dissociation::rank() const {
    int r = 0;
    for (auto s : added) r += s.size();
    return r;
}

Dissociation empty_dissociation(const Query& q) { return Dissociation{std::vector<VarSet>(q.atoms.size())}; }

void check_dissociation(const Query& q, const Dissociation& d) {
    if (d.added.size() != q.atoms.size())
        throw UsageError("dissociation has " + std::to_string(d.added.size()) + " entries for " +
                         std::to_string(q.atoms.size()) + " atoms");
    const VarSet all = q.vars();
    for (int i = 0; i < q.atom_count(); ++i) {
        if (d.added[i].intersects(q.atoms[i].vars))
            throw UsageError("dissociation adds a variable that atom " + q.atoms[i].relation + " already has");
        if (!d.added[i].subset_of(all)) throw UsageError("dissociation adds a variable not in the query");
    }
}

namespace {

std::string dissociated_name(const Query& q, int i, VarSet added) {
    return q.atoms[i].relation + "~" + q.var_list(added, "~");
}

std::string fresh_attribute(const RelationDef& rel, std::string base) {
    while (rel.attribute_index(base) >= 0) base = "~" + base;
    return base;
}

} // namespace

Query dissociate_query(const Query& q, const Dissociation& d) {
    check_dissociation(q, d);
    Query out = q;
    for (int i = 0; i < q.atom_count(); ++i) {
        if (d.added[i].empty()) continue;
        auto& a = out.atoms[i];
        a.relation = dissociated_name(q, i, d.added[i]);
        d.added[i].for_each([&](int v) {
            a.args.push_back(Term{v, {}});
            for (const auto& other : q.atoms)
                for (const auto& p : other.predicates)
                    if (p.var == v &&
                        std::none_of(a.predicates.begin(), a.predicates.end(), [&](const Predicate& e) {
                            return e.var == p.var && e.op == p.op && e.value == p.value;
                        }))
                        a.predicates.push_back(p);
        });
        a.vars |= d.added[i];
    }
    return out;
}

RelationDef dissociate_table(const RelationDef& rel, const std::vector<std::string>& new_attributes,
                             const Database& db, TupleId& next_id, const std::vector<std::set<Constant>>* allowed) {
    if (new_attributes.empty()) return rel;
    for (const auto& a : new_attributes)
        if (rel.attribute_index(a) >= 0) throw UsageError("dissociation attribute '" + a + "' already exists");
    RelationDef out;
    out.name = rel.name;
    out.attributes = rel.attributes;
    out.attributes.insert(out.attributes.end(), new_attributes.begin(), new_attributes.end());
    out.deterministic = rel.deterministic;

    std::vector<std::vector<Constant>> domains;
    for (std::size_t k = 0; k < new_attributes.size(); ++k) {
        const auto& src = allowed != nullptr ? (*allowed)[k] : db.active_domain();
        domains.emplace_back(src.begin(), src.end());
    }
    for (const auto& row : rel.rows) {
        std::vector<std::size_t> idx(domains.size(), 0);
        if (std::any_of(domains.begin(), domains.end(), [](const auto& dom) { return dom.empty(); })) break;
        while (true) {
            TupleRow copy{next_id++, row.values, row.prob};
            for (std::size_t k = 0; k < domains.size(); ++k) copy.values.push_back(domains[k][idx[k]]);
            out.rows.push_back(std::move(copy));
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == domains[k].size()) idx[k++] = 0;
            if (k == idx.size()) break;
        }
    }
    return out;
}

DissociatedInstance dissociate_instance(const Query& q, const Database& db, const Dissociation& d, bool prune) {
    Query dq = dissociate_query(q, d);
    DatabaseBuilder b(db);
    TupleId next_id = db.next_tuple_id();
    for (int i = 0; i < q.atom_count(); ++i) {
        if (d.added[i].empty()) continue;
        const auto& rel = db.relation(q.atoms[i].relation);
        std::vector<std::string> attrs;
        std::vector<std::set<Constant>> allowed;
        d.added[i].for_each([&](int v) {
            attrs.push_back(fresh_attribute(rel, "~" + q.var_names[v]));
            if (!prune) return;
            std::optional<std::set<Constant>> vals;
            for (const auto& other : q.atoms) {
                const auto& orel = db.relation(other.relation);
                for (std::size_t pos = 0; pos < other.args.size(); ++pos) {
                    if (other.args[pos].var != v) continue;
                    std::set<Constant> col;
                    for (const auto& row : orel.rows) col.insert(row.values[pos]);
                    if (!vals) {
                        vals = std::move(col);
                    } else {
                        std::set<Constant> both;
                        std::set_intersection(vals->begin(), vals->end(), col.begin(), col.end(),
                                              std::inserter(both, both.end()));
                        vals = std::move(both);
                    }
                }
            }
            allowed.push_back(vals ? *vals : db.active_domain());
        });
        RelationDef nr = dissociate_table(rel, attrs, db, next_id, prune ? &allowed : nullptr);
        nr.name = dq.atoms[i].relation;
        if (db.find(nr.name) != nullptr) throw UsageError("relation name '" + nr.name + "' already in use");
        b.put_relation(std::move(nr));
    }
    return DissociatedInstance{std::move(dq), b.build()};
}

bool partial_order_leq(const Dissociation& d1, const Dissociation& d2) {
    if (d1.added.size() != d2.added.size()) throw UsageError("dissociations of different queries");
    for (std::size_t i = 0; i < d1.added.size(); ++i)
        if (!d1.added[i].subset_of(d2.added[i])) return false;
    return true;
}

bool is_safe_dissociation(const Query& q, const Dissociation& d) {
    check_dissociation(q, d);
    auto vars = q.atom_vars();
    for (std::size_t i = 0; i < vars.size(); ++i) vars[i] |= d.added[i];
    return is_hierarchical(vars, q.all_atoms(), q.head_set());
}

namespace {

void collect_missing(const Plan& p, std::vector<VarSet>& added) {
    if (p->kind == PlanKind::Min || p->kind == PlanKind::View)
        throw UsageError("plan_to_dissociation needs a plan without min or view nodes");
    if (p->kind == PlanKind::Join) {
        for (const auto& c : p->children) {
            const VarSet missing = p->head - c->head;
            c->atoms.for_each([&](int i) { added[i] |= missing; });
        }
    }
    for (const auto& c : p->children) collect_missing(c, added);
}

} // namespace

Dissociation plan_to_dissociation(const Query& q, const Plan& p) {
    if (p->atoms != q.all_atoms()) throw UsageError("plan does not cover every atom of the query");
    Dissociation d = empty_dissociation(q);
    collect_missing(p, d.added);
    const VarSet ev = q.evars();
    for (int i = 0; i < q.atom_count(); ++i) d.added[i] = (d.added[i] & ev) - q.atoms[i].vars;
    return d;
}

Plan dissociation_to_plan(const Query& q, const Dissociation& d) {
    if (!is_safe_dissociation(q, d)) throw UsageError("dissociation is not safe");
    PlanShape shape = plain_shape(q);
    for (int i = 0; i < q.atom_count(); ++i) shape.vars[i] |= d.added[i];
    PlanSpace space(q, shape);
    return space.plans(space.root()).front();
}

std::vector<std::pair<int, int>> dissociation_slots(const Query& q) {
    std::vector<std::pair<int, int>> slots;
    const VarSet ev = q.evars();
    for (int i = 0; i < q.atom_count(); ++i)
        (ev - q.atoms[i].vars).for_each([&](int v) { slots.emplace_back(i, v); });
    return slots;
}

Dissociation dissociation_from_mask(const Query& q, const std::vector<std::pair<int, int>>& slots,
                                    std::uint64_t mask) {
    Dissociation d = empty_dissociation(q);
    for (std::size_t k = 0; k < slots.size(); ++k)
        if ((mask >> k) & 1u) d.added[slots[k].first].insert(slots[k].second);
    return d;
}

} // namespace propdb
