#include "propdb/optimizer.hpp"

#include "propdb/matching.hpp"
#include "propdb/planner.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace propdb {

namespace {

PlanShape shape_for(const Query& q, const Database* db) { return db ? fd_shape(q, *db) : plain_shape(q); }

class ViewBuilder {
public:
    explicit ViewBuilder(PlanSpace& space) : space_(space) {}

    ViewSet run() {
        find(space_.root());
        std::vector<int> ids = marked_;
        std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
            return space_.node(a).atoms.size() < space_.node(b).atoms.size();
        });
        ViewSet out;
        for (std::size_t k = 0; k < ids.size(); ++k) name_[ids[k]] = static_cast<int>(k);
        for (int id : ids) out.views.push_back(reuse(id, id));
        out.main = reuse(space_.root(), -1);
        return out;
    }

private:
    void find(int id) {
        const auto& n = space_.node(id);
        if (n.kind == PlanSpace::Kind::Split) {
            for (int p : n.parts) find(p);
            return;
        }
        if ((n.kind == PlanSpace::Kind::Leaf && n.evars.empty()) || marked_set_.contains(id)) return;
        if (seen_.contains(id)) {
            marked_set_.insert(id);
            marked_.push_back(id);
        }
        seen_.insert(id);
        for (const auto& opt : n.options) find(opt.second);
    }

    Plan reuse(int id, int self) {
        const Query& q = space_.query();
        if (id != self) {
            if (auto it = name_.find(id); it != name_.end()) {
                const Plan def = space_.single(id);
                return make_view_ref(q, it->second, def->head, def->atoms);
            }
        }
        const auto& n = space_.node(id);
        switch (n.kind) {
        case PlanSpace::Kind::Leaf:
            return space_.leaf_plan(id);
        case PlanSpace::Kind::Split: {
            std::vector<Plan> parts;
            for (int p : n.parts) parts.push_back(reuse(p, -1));
            return make_join(q, std::move(parts));
        }
        case PlanSpace::Kind::Choice: {
            std::vector<Plan> alts;
            for (const auto& [away, child] : n.options) alts.push_back(make_project(q, away, reuse(child, -1)));
            return make_min(q, std::move(alts));
        }
        }
        return nullptr;
    }

    PlanSpace& space_;
    std::set<int> seen_;
    std::set<int> marked_set_;
    std::vector<int> marked_;
    std::map<int, int> name_;
};

} // namespace

Plan single_plan(const Query& q, const Database* db) {
    PlanSpace space(q, shape_for(q, db));
    return space.single(space.root());
}

ViewSet common_subplans(const Query& q, const Database* db) {
    PlanSpace space(q, shape_for(q, db));
    return ViewBuilder(space).run();
}

std::string ViewSet::render(const Query& q) const {
    std::string out;
    for (std::size_t k = 0; k < views.size(); ++k)
        out += view_name(static_cast<int>(k)) + "(" + q.var_list(views[k]->head) + ") = " + views[k]->text + "\n";
    out += "main = " + main->text + "\n";
    return out;
}

std::pair<Database, Query> semijoin_reduce(const Query& q, const Database& db) {
    std::vector<std::set<TupleId>> used(q.atoms.size());
    for_each_match(q, db, [&](const std::vector<const TupleRow*>& rows, const std::vector<Constant>&) {
        for (std::size_t i = 0; i < rows.size(); ++i) used[i].insert(rows[i]->id);
    });
    DatabaseBuilder b(db);
    for (int i = 0; i < q.atom_count(); ++i) {
        RelationDef rel = db.relation(q.atoms[i].relation);
        std::erase_if(rel.rows, [&](const TupleRow& r) { return !used[i].contains(r.id); });
        b.put_relation(std::move(rel));
    }
    return {b.build(), q};
}

} // namespace propdb
