#include "propdb/executor.hpp"

#include "propdb/error.hpp"
#include "propdb/matching.hpp"
#include "propdb/planner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace propdb {

Probability AnswerTable::score(const ValueTuple& key) const {
    auto it = rows.find(key);
    return it == rows.end() ? 0.0 : it->second;
}

Probability ior(std::span<const Probability> probs) {
    double log_none = 0.0;
    bool certain = false;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) throw UsageError("ior input outside [0,1]");
        if (p == 1.0) certain = true;
        else log_none += std::log1p(-p);
    }
    if (certain) return 1.0;
    return std::clamp(-std::expm1(log_none), 0.0, 1.0);
}

Probability ior(std::initializer_list<Probability> probs) {
    return ior(std::span<const Probability>(probs.begin(), probs.size()));
}

namespace {

std::vector<int> sorted_columns(VarSet s) { return s.elements(); }

AnswerTable eval_scan(const Query& q, int atom, const Database& db) {
    const auto& a = q.atoms[atom];
    const bool det = db.relation(a.relation).deterministic;
    AnswerTable t;
    t.columns = sorted_columns(a.vars);
    std::vector<int> pos;
    for (int v : t.columns)
        for (std::size_t k = 0; k < a.args.size(); ++k)
            if (a.args[k].var == v) {
                pos.push_back(static_cast<int>(k));
                break;
            }
    for (const auto* row : matching_rows(q, atom, db)) {
        ValueTuple key;
        for (int k : pos) key.push_back(row->values[k]);
        t.rows.emplace(std::move(key), det ? 1.0 : row->prob);
    }
    return t;
}

AnswerTable join2(const AnswerTable& a, const AnswerTable& b) {
    std::vector<int> cols;
    std::set_union(a.columns.begin(), a.columns.end(), b.columns.begin(), b.columns.end(), std::back_inserter(cols));
    std::vector<int> shared;
    std::set_intersection(a.columns.begin(), a.columns.end(), b.columns.begin(), b.columns.end(),
                          std::back_inserter(shared));
    auto positions = [](const std::vector<int>& of, const std::vector<int>& in) {
        std::vector<int> pos;
        for (int v : of) pos.push_back(static_cast<int>(std::find(in.begin(), in.end(), v) - in.begin()));
        return pos;
    };
    const auto a_shared = positions(shared, a.columns);
    const auto b_shared = positions(shared, b.columns);
    std::map<ValueTuple, std::vector<const std::pair<const ValueTuple, Probability>*>> index;
    for (const auto& row : b.rows) {
        ValueTuple key;
        for (int k : b_shared) key.push_back(row.first[k]);
        index[std::move(key)].push_back(&row);
    }
    std::vector<std::pair<bool, int>> source;
    for (int v : cols) {
        auto ia = std::find(a.columns.begin(), a.columns.end(), v);
        if (ia != a.columns.end()) source.emplace_back(true, static_cast<int>(ia - a.columns.begin()));
        else source.emplace_back(false, static_cast<int>(std::find(b.columns.begin(), b.columns.end(), v) -
                                                         b.columns.begin()));
    }
    AnswerTable out;
    out.columns = cols;
    for (const auto& ra : a.rows) {
        ValueTuple key;
        for (int k : a_shared) key.push_back(ra.first[k]);
        auto it = index.find(key);
        if (it == index.end()) continue;
        for (const auto* rb : it->second) {
            ValueTuple v;
            for (auto [from_a, k] : source) v.push_back(from_a ? ra.first[k] : rb->first[k]);
            out.rows.emplace(std::move(v), ra.second * rb->second);
        }
    }
    return out;
}

AnswerTable project(const AnswerTable& t, VarSet away) {
    AnswerTable out;
    std::vector<int> keep;
    for (std::size_t k = 0; k < t.columns.size(); ++k)
        if (!away.contains(t.columns[k])) {
            out.columns.push_back(t.columns[k]);
            keep.push_back(static_cast<int>(k));
        }
    std::map<ValueTuple, std::vector<Probability>> groups;
    for (const auto& [key, p] : t.rows) {
        ValueTuple g;
        for (int k : keep) g.push_back(key[k]);
        groups[std::move(g)].push_back(p);
    }
    for (auto& [g, ps] : groups) out.rows.emplace(g, ior(ps));
    return out;
}

AnswerTable eval_node(const Query& q, const Plan& p, const Database& db, const ViewTables* views) {
    switch (p->kind) {
    case PlanKind::Scan:
        return eval_scan(q, p->atom, db);
    case PlanKind::Project:
        return project(eval_node(q, p->children.front(), db, views), p->away);
    case PlanKind::Join: {
        AnswerTable acc = eval_node(q, p->children.front(), db, views);
        for (std::size_t k = 1; k < p->children.size(); ++k) acc = join2(acc, eval_node(q, p->children[k], db, views));
        return acc;
    }
    case PlanKind::Min: {
        std::vector<AnswerTable> parts;
        for (const auto& c : p->children) parts.push_back(eval_node(q, c, db, views));
        return min_tables(parts);
    }
    case PlanKind::View:
        if (views == nullptr || p->view >= static_cast<int>(views->size()))
            throw UsageError("plan references " + view_name(p->view) + " before it is materialized");
        return (*views)[p->view];
    }
    throw UsageError("unknown plan node");
}

} // namespace

AnswerTable min_tables(const std::vector<AnswerTable>& tables) {
    if (tables.empty()) throw UsageError("min over no tables");
    AnswerTable out;
    out.columns = tables.front().columns;
    for (const auto& t : tables)
        if (t.columns != out.columns) throw UsageError("head-variable mismatch under min");
    std::set<ValueTuple> keys;
    for (const auto& t : tables)
        for (const auto& [k, _] : t.rows) keys.insert(k);
    for (const auto& k : keys) {
        double m = 1.0;
        for (const auto& t : tables) m = std::min(m, t.score(k));
        out.rows.emplace(k, m);
    }
    return out;
}

AnswerTable eval_plan(const Query& q, const Plan& p, const Database& db, const ViewTables* views) {
    AnswerTable t = eval_node(q, p, db, views);
    if (t.columns.empty() && t.rows.empty()) t.rows.emplace(ValueTuple{}, 0.0);
    return t;
}

AnswerTable eval_views(const Query& q, const ViewSet& vs, const Database& db) {
    ViewTables tables;
    for (const auto& v : vs.views) tables.push_back(eval_node(q, v, db, &tables));
    return eval_plan(q, vs.main, db, &tables);
}

AnswerTable reorder(const AnswerTable& t, const std::vector<int>& order) {
    std::vector<int> pos;
    for (int v : order) {
        auto it = std::find(t.columns.begin(), t.columns.end(), v);
        if (it == t.columns.end()) throw UsageError("reorder: column missing from table");
        pos.push_back(static_cast<int>(it - t.columns.begin()));
    }
    if (pos.size() != t.columns.size()) throw UsageError("reorder: column count mismatch");
    AnswerTable out;
    out.columns = order;
    for (const auto& [k, p] : t.rows) {
        ValueTuple v;
        for (int i : pos) v.push_back(k[i]);
        out.rows.emplace(std::move(v), p);
    }
    return out;
}

Pipeline parse_pipeline(std::string_view name) {
    if (name == "none") return Pipeline::None;
    if (name == "single") return Pipeline::Single;
    if (name == "views") return Pipeline::Views;
    if (name == "semijoin") return Pipeline::Semijoin;
    if (name == "all") return Pipeline::All;
    throw UsageError("unknown optimization pipeline '" + std::string(name) + "'");
}

std::string_view pipeline_name(Pipeline p) {
    switch (p) {
    case Pipeline::None: return "none";
    case Pipeline::Single: return "single";
    case Pipeline::Views: return "views";
    case Pipeline::Semijoin: return "semijoin";
    case Pipeline::All: return "all";
    }
    return "?";
}

AnswerTable propagation_score(const Query& q, const Database& db, Pipeline opt) {
    AnswerTable t;
    switch (opt) {
    case Pipeline::None: {
        std::vector<AnswerTable> parts;
        for (const auto& p : enumerate_plans_fd(q, db)) parts.push_back(eval_plan(q, p, db));
        t = min_tables(parts);
        break;
    }
    case Pipeline::Single:
        t = eval_plan(q, single_plan(q, &db), db);
        break;
    case Pipeline::Views:
        t = eval_views(q, common_subplans(q, &db), db);
        break;
    case Pipeline::Semijoin: {
        auto [rdb, rq] = semijoin_reduce(q, db);
        return propagation_score(rq, rdb, Pipeline::None);
    }
    case Pipeline::All: {
        auto [rdb, rq] = semijoin_reduce(q, db);
        return propagation_score(rq, rdb, Pipeline::Views);
    }
    }
    return reorder(t, q.head);
}

std::vector<std::pair<ValueTuple, Probability>> ranked_rows(const AnswerTable& t) {
    std::vector<std::pair<ValueTuple, Probability>> rows(t.rows.begin(), t.rows.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return rows;
}

std::string format_score(double p) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
    return std::string(buf, ptr);
}

std::string answers_tsv(const Query& q, const AnswerTable& t) {
    std::string out;
    for (int v : t.columns) out += q.var_names[v] + "\t";
    out += "score\n";
    for (const auto& [k, p] : ranked_rows(t)) {
        for (const auto& c : k) out += to_string(c) + "\t";
        out += format_score(p) + "\n";
    }
    return out;
}

} // namespace propdb
