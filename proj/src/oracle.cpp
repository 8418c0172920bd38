#include "propdb/oracle.hpp"

#include "propdb/error.hpp"
#include "propdb/matching.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace propdb {

std::string LineageDNF::to_text() const {
    std::ostringstream out;
    for (const auto& [id, p] : var_probs) {
        out << "p " << id << ' ' << format_score(p);
        if (auto it = partition.find(id); it != partition.end()) out << ' ' << it->second;
        out << '\n';
    }
    for (const auto& c : clauses) {
        for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << c[i];
        out << '\n';
    }
    return out.str();
}

Lineage lineage(const Query& q, const Database& db) {
    std::map<ValueTuple, std::set<std::vector<TupleId>>> clauses;
    Lineage out;
    for_each_match(q, db, [&](const std::vector<const TupleRow*>& rows, const std::vector<Constant>& binding) {
        ValueTuple key;
        for (int v : q.head) key.push_back(binding[v]);
        auto& dnf = out[key];
        std::vector<TupleId> clause;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& rel = db.relation(q.atoms[i].relation);
            clause.push_back(rows[i]->id);
            dnf.var_probs[rows[i]->id] = rel.deterministic ? 1.0 : rows[i]->prob;
            dnf.partition[rows[i]->id] = rel.name;
        }
        std::sort(clause.begin(), clause.end());
        clauses[key].insert(std::move(clause));
    });
    for (auto& [key, dnf] : out) dnf.clauses.assign(clauses[key].begin(), clauses[key].end());
    return out;
}

namespace {

using Clause = std::vector<std::uint32_t>;
using Dnf = std::vector<Clause>;

/// Sorts, removes duplicates and clauses that contain another clause.
void minimize(Dnf& f) {
    for (auto& c : f) std::sort(c.begin(), c.end());
    std::sort(f.begin(), f.end(), [](const Clause& a, const Clause& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    f.erase(std::unique(f.begin(), f.end()), f.end());
    Dnf kept;
    for (auto& c : f) {
        bool subsumed = std::any_of(kept.begin(), kept.end(), [&](const Clause& k) {
            return std::includes(c.begin(), c.end(), k.begin(), k.end());
        });
        if (!subsumed) kept.push_back(std::move(c));
    }
    std::sort(kept.begin(), kept.end());
    f = std::move(kept);
}

std::vector<Dnf> split_components(const Dnf& f) {
    std::map<std::uint32_t, std::uint32_t> parent;
    std::function<std::uint32_t(std::uint32_t)> root = [&](std::uint32_t x) {
        auto it = parent.find(x);
        if (it == parent.end() || it->second == x) return parent[x] = x;
        return it->second = root(it->second);
    };
    for (const auto& c : f)
        for (std::size_t i = 0; i < c.size(); ++i) {
            root(c[i]);
            if (i) parent[root(c[i])] = root(c[0]);
        }
    std::map<std::uint32_t, Dnf> groups;
    for (const auto& c : f) groups[root(c[0])].push_back(c);
    std::vector<Dnf> out;
    for (auto& [_, g] : groups) out.push_back(std::move(g));
    return out;
}

std::size_t distinct_vars(const Dnf& f) {
    std::set<std::uint32_t> vs;
    for (const auto& c : f) vs.insert(c.begin(), c.end());
    return vs.size();
}

class Shannon {
public:
    explicit Shannon(std::vector<double> probs) : p_(std::move(probs)) {}

    double solve(const Dnf& f) {
        if (f.empty()) return 0.0;
        if (f.front().empty()) return 1.0;
        if (f.size() == 1) {
            double r = 1.0;
            for (auto v : f.front()) r *= p_[v];
            return r;
        }
        if (auto it = memo_.find(f); it != memo_.end()) return it->second;
        double result;
        auto comps = split_components(f);
        if (comps.size() > 1) {
            double none = 1.0;
            for (const auto& c : comps) none *= 1.0 - solve(c);
            result = 1.0 - none;
        } else {
            std::map<std::uint32_t, int> freq;
            for (const auto& c : f)
                for (auto v : c) ++freq[v];
            std::uint32_t pick = freq.begin()->first;
            int best = 0;
            for (const auto& [v, n] : freq)
                if (n > best) pick = v, best = n;
            Dnf pos, neg;
            for (const auto& c : f) {
                if (std::binary_search(c.begin(), c.end(), pick)) {
                    Clause r;
                    for (auto v : c)
                        if (v != pick) r.push_back(v);
                    pos.push_back(std::move(r));
                } else {
                    pos.push_back(c);
                    neg.push_back(c);
                }
            }
            minimize(pos);
            minimize(neg);
            result = p_[pick] * solve(pos) + (1.0 - p_[pick]) * solve(neg);
        }
        memo_.emplace(f, result);
        return result;
    }

private:
    std::vector<double> p_;
    std::map<Dnf, double> memo_;
};

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

Probability exact_prob(const LineageDNF& dnf, int var_limit) {
    std::map<TupleId, std::uint32_t> local;
    std::vector<double> probs;
    Dnf f;
    for (const auto& clause : dnf.clauses) {
        Clause c;
        bool dead = false;
        for (auto id : clause) {
            auto it = dnf.var_probs.find(id);
            if (it == dnf.var_probs.end()) throw UsageError("lineage variable " + std::to_string(id) + " has no probability");
            const double p = it->second;
            if (p >= 1.0) continue;
            if (p <= 0.0) {
                dead = true;
                break;
            }
            auto [pos, fresh] = local.emplace(id, static_cast<std::uint32_t>(probs.size()));
            if (fresh) probs.push_back(p);
            c.push_back(pos->second);
        }
        if (dead) continue;
        if (c.empty()) return 1.0;
        f.push_back(std::move(c));
    }
    minimize(f);
    Shannon solver(probs);
    double none = 1.0;
    for (const auto& comp : split_components(f)) {
        const auto n = distinct_vars(comp);
        if (n > static_cast<std::size_t>(var_limit))
            throw OracleInfeasible("exact inference needs " + std::to_string(n) +
                                   " variables in one component, limit is " + std::to_string(var_limit));
        none *= 1.0 - solver.solve(comp);
    }
    return 1.0 - none;
}

Probability mc_estimate(const LineageDNF& dnf, std::uint64_t samples, std::uint64_t seed) {
    if (samples < 1) throw UsageError("Monte Carlo needs at least one sample");
    std::vector<TupleId> ids;
    std::vector<double> probs;
    for (const auto& [id, p] : dnf.var_probs) {
        ids.push_back(id);
        probs.push_back(p);
    }
    std::vector<std::vector<std::size_t>> clauses;
    for (const auto& c : dnf.clauses) {
        std::vector<std::size_t> idx;
        for (auto id : c) idx.push_back(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
        clauses.push_back(std::move(idx));
    }
    if (clauses.empty()) return 0.0;
    std::vector<char> world(ids.size());
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        std::uint64_t mix = seed;
        std::uint64_t state = splitmix64(mix) ^ (i * 0xD1B54A32D192ED03ull);
        for (std::size_t v = 0; v < ids.size(); ++v) {
            const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
            world[v] = u < probs[v];
        }
        for (const auto& c : clauses)
            if (std::all_of(c.begin(), c.end(), [&](std::size_t v) { return world[v] != 0; })) {
                ++hits;
                break;
            }
    }
    return static_cast<double>(hits) / static_cast<double>(samples);
}

namespace {

AnswerTable per_answer(const Query& q, const Database& db, const std::function<double(const LineageDNF&)>& f) {
    AnswerTable t;
    t.columns = q.head;
    for (const auto& [key, dnf] : lineage(q, db)) t.rows.emplace(key, f(dnf));
    if (q.head.empty() && t.rows.empty()) t.rows.emplace(ValueTuple{}, 0.0);
    return t;
}

} // namespace

AnswerTable exact_answers(const Query& q, const Database& db, int var_limit) {
    return per_answer(q, db, [&](const LineageDNF& d) { return exact_prob(d, var_limit); });
}

AnswerTable mc_answers(const Query& q, const Database& db, std::uint64_t samples, std::uint64_t seed) {
    if (samples < 1) throw UsageError("Monte Carlo needs at least one sample");
    return per_answer(q, db, [&](const LineageDNF& d) { return mc_estimate(d, samples, seed); });
}

namespace {

std::string node_name(const KPartiteGraph& g, int layer, int idx) {
    if (layer == 0) return "s";
    if (layer == g.k()) return "t";
    return "n" + std::to_string(layer) + "_" + std::to_string(idx);
}

void check_graph(const KPartiteGraph& g) {
    if (g.k() < 1 || static_cast<int>(g.layer_sizes.size()) != g.k() + 1)
        throw UsageError("layered graph needs k >= 1 edge layers and k+1 node layers");
    if (g.layer_sizes.front() != 1 || g.layer_sizes.back() != 1)
        throw UsageError("first and last layers must hold exactly the source and the target");
    for (int i = 0; i < g.k(); ++i)
        for (const auto& e : g.edges[i])
            if (e.from < 0 || e.from >= g.layer_sizes[i] || e.to < 0 || e.to >= g.layer_sizes[i + 1])
                throw UsageError("edge endpoint outside its layer");
}

} // namespace

std::pair<Database, Query> kpartite_instance(const KPartiteGraph& g) {
    check_graph(g);
    DatabaseBuilder b;
    std::string body;
    for (int i = 0; i < g.k(); ++i) {
        const auto name = "E" + std::to_string(i + 1);
        b.relation(name, {"src", "dst"});
        for (const auto& e : g.edges[i])
            b.row(name, {node_name(g, i, e.from), node_name(g, i + 1, e.to)}, e.p);
        const auto from = i == 0 ? std::string("'s'") : "x" + std::to_string(i);
        const auto to = i + 1 == g.k() ? std::string("'t'") : "x" + std::to_string(i + 1);
        body += (i ? ", " : "") + name + "(" + from + "," + to + ")";
    }
    Database db = b.build();
    Query q = parse_query("q() :- " + body, &db);
    return {std::move(db), std::move(q)};
}

Plan kpartite_propagation_plan(const Query& chain) {
    Plan p = make_scan(chain, 0);
    for (int i = 1; i < chain.atom_count(); ++i) p = make_project(chain, p->head, make_join(chain, {p, make_scan(chain, i)}));
    return p;
}

Probability kpartite_reliability(const KPartiteGraph& g, int var_limit) {
    auto [db, q] = kpartite_instance(g);
    return exact_answers(q, db, var_limit).score(ValueTuple{});
}

Probability kpartite_propagation(const KPartiteGraph& g) {
    check_graph(g);
    std::vector<double> rho{1.0};
    for (int i = 0; i < g.k(); ++i) {
        std::vector<double> none(g.layer_sizes[i + 1], 1.0);
        for (const auto& e : g.edges[i]) none[e.to] *= 1.0 - rho[e.from] * e.p;
        rho.assign(none.size(), 0.0);
        for (std::size_t v = 0; v < none.size(); ++v) rho[v] = 1.0 - none[v];
    }
    return rho.front();
}

} // namespace propdb
