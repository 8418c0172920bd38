#include "propdb/matching.hpp"

#include <map>

namespace propdb {

std::vector<const TupleRow*> matching_rows(const Query& q, int atom, const Database& db) {
    const auto& a = q.atoms[atom];
    const auto& rel = db.relation(a.relation);
    std::vector<const TupleRow*> out;
    for (const auto& row : rel.rows) {
        bool ok = true;
        std::map<int, const Constant*> seen;
        for (std::size_t pos = 0; ok && pos < a.args.size(); ++pos) {
            const auto& t = a.args[pos];
            const auto& v = row.values[pos];
            if (!t.is_var()) {
                ok = v == t.value;
                continue;
            }
            auto [it, fresh] = seen.emplace(t.var, &v);
            if (!fresh) {
                ok = *it->second == v;
                continue;
            }
            for (const auto& p : a.predicates)
                if (p.var == t.var && !p.accepts(v)) ok = false;
        }
        if (ok) out.push_back(&row);
    }
    return out;
}

void for_each_match(const Query& q, const Database& db,
                    const std::function<void(const std::vector<const TupleRow*>&, const std::vector<Constant>&)>& f) {
    const int m = q.atom_count();
    std::vector<int> order;
    VarSet bound;
    AtomSet left = q.all_atoms();
    while (!left.empty()) {
        int best = -1, best_score = -1;
        left.for_each([&](int i) {
            const int s = (q.atoms[i].vars & bound).size();
            if (s > best_score) best = i, best_score = s;
        });
        order.push_back(best);
        bound |= q.atoms[best].vars;
        left.erase(best);
    }

    struct Step {
        int atom;
        std::vector<int> key_pos;
        std::vector<int> key_vars;
        std::map<std::vector<Constant>, std::vector<const TupleRow*>> index;
    };
    std::vector<Step> steps;
    bound = VarSet{};
    for (int i : order) {
        Step s;
        s.atom = i;
        VarSet used;
        for (std::size_t pos = 0; pos < q.atoms[i].args.size(); ++pos) {
            const int v = q.atoms[i].args[pos].var;
            if (v >= 0 && bound.contains(v) && !used.contains(v)) {
                used.insert(v);
                s.key_pos.push_back(static_cast<int>(pos));
                s.key_vars.push_back(v);
            }
        }
        for (const auto* row : matching_rows(q, i, db)) {
            std::vector<Constant> key;
            for (int pos : s.key_pos) key.push_back(row->values[pos]);
            s.index[std::move(key)].push_back(row);
        }
        bound |= q.atoms[i].vars;
        steps.push_back(std::move(s));
    }

    std::vector<const TupleRow*> rows(m, nullptr);
    std::vector<Constant> binding(q.var_names.size());
    std::function<void(std::size_t)> go = [&](std::size_t k) {
        if (k == steps.size()) {
            f(rows, binding);
            return;
        }
        const auto& s = steps[k];
        std::vector<Constant> key;
        for (int v : s.key_vars) key.push_back(binding[v]);
        auto it = s.index.find(key);
        if (it == s.index.end()) return;
        for (const auto* row : it->second) {
            rows[s.atom] = row;
            const auto& a = q.atoms[s.atom];
            for (std::size_t pos = 0; pos < a.args.size(); ++pos)
                if (a.args[pos].is_var()) binding[a.args[pos].var] = row->values[pos];
            go(k + 1);
        }
    };
    go(0);
}

} // namespace propdb
