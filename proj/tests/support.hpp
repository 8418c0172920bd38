#pragma once

#include "propdb/dissociation.hpp"
#include "propdb/error.hpp"
#include "propdb/executor.hpp"
#include "propdb/model.hpp"
#include "propdb/oracle.hpp"
#include "propdb/planner.hpp"
#include "propdb/query.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace testing {

using namespace propdb;
using Rational = boost::multiprecision::cpp_rational;

inline Rational exact_rational(double p) {
    int e = 0;
    const double m = std::frexp(p, &e);
    const auto mant = static_cast<long long>(std::ldexp(m, 53));
    Rational r(mant);
    const int shift = e - 53;
    if (shift >= 0) r *= Rational(boost::multiprecision::cpp_int(1) << shift);
    else r /= Rational(boost::multiprecision::cpp_int(1) << -shift);
    return r;
}

inline Rational frac(long long a, long long b) { return Rational(a) / Rational(b); }

inline Database db_from(const std::string& schema, std::map<std::string, std::string, std::less<>> tsv) {
    return load_database(schema, tsv);
}

/// Answers that hold in one world, by naive backtracking over atom rows.
inline void naive_answers(const Query& q, const Database& db, const std::vector<char>& present,
                          std::map<TupleId, std::size_t>& slot, std::set<ValueTuple>& out) {
    std::vector<std::optional<Constant>> binding(q.var_names.size());
    std::function<void(int)> go = [&](int i) {
        if (i == q.atom_count()) {
            ValueTuple key;
            for (int v : q.head) key.push_back(*binding[v]);
            out.insert(key);
            return;
        }
        const auto& a = q.atoms[i];
        for (const auto& row : db.relation(a.relation).rows) {
            if (auto it = slot.find(row.id); it != slot.end() && !present[it->second]) continue;
            if (row.prob == 0.0) continue;
            auto saved = binding;
            bool ok = true;
            for (std::size_t pos = 0; ok && pos < a.args.size(); ++pos) {
                const auto& t = a.args[pos];
                const auto& v = row.values[pos];
                if (!t.is_var()) {
                    ok = t.value == v;
                } else if (binding[t.var]) {
                    ok = *binding[t.var] == v;
                } else {
                    binding[t.var] = v;
                    for (const auto& p : a.predicates)
                        if (p.var == t.var && !p.accepts(v)) ok = false;
                }
            }
            if (ok) go(i + 1);
            binding = saved;
        }
    };
    go(0);
}

/// Exact per-answer probabilities by enumerating all possible worlds of the
/// uncertain tuples of the query's relations, in rational arithmetic.
inline std::map<ValueTuple, Rational> world_enumeration(const Query& q, const Database& db, int max_vars = 20) {
    std::vector<const TupleRow*> uncertain;
    std::map<TupleId, std::size_t> slot;
    std::set<std::string> seen;
    for (const auto& a : q.atoms) {
        if (!seen.insert(a.relation).second) continue;
        const auto& rel = db.relation(a.relation);
        for (const auto& row : rel.rows)
            if (!rel.deterministic && row.prob > 0.0 && row.prob < 1.0) {
                slot[row.id] = uncertain.size();
                uncertain.push_back(&row);
            }
    }
    if (static_cast<int>(uncertain.size()) > max_vars) throw std::runtime_error("world enumeration too large");
    std::vector<Rational> p;
    for (const auto* r : uncertain) p.push_back(exact_rational(r->prob));
    std::map<ValueTuple, Rational> result;
    const std::uint64_t worlds = std::uint64_t{1} << uncertain.size();
    std::vector<char> present(uncertain.size());
    for (std::uint64_t w = 0; w < worlds; ++w) {
        Rational weight = 1;
        for (std::size_t i = 0; i < uncertain.size(); ++i) {
            present[i] = (w >> i) & 1u;
            weight *= present[i] ? p[i] : 1 - p[i];
        }
        std::set<ValueTuple> ans;
        naive_answers(q, db, present, slot, ans);
        for (const auto& a : ans) result[a] += weight;
    }
    if (q.head.empty() && result.empty()) result[ValueTuple{}] = 0;
    return result;
}

inline double to_double(const Rational& r) { return static_cast<double>(r); }

/// Random query: `atoms` atoms over up to `vars` variables, each atom a
/// nonempty variable subset, relations R0..R(m-1).
inline Query random_query(std::mt19937_64& rng, int atoms, int vars, bool allow_head) {
    while (true) {
        std::string body;
        std::set<int> used;
        for (int i = 0; i < atoms; ++i) {
            std::vector<int> vs;
            for (int v = 0; v < vars; ++v)
                if (rng() % 2) vs.push_back(v);
            if (vs.empty()) vs.push_back(static_cast<int>(rng() % vars));
            if (vs.size() > 3) vs.resize(3);
            body += (i ? ", R" : "R") + std::to_string(i) + "(";
            for (std::size_t k = 0; k < vs.size(); ++k) {
                body += (k ? ",v" : "v") + std::to_string(vs[k]);
                used.insert(vs[k]);
            }
            body += ")";
        }
        std::string head;
        if (allow_head)
            for (int v : used)
                if (rng() % 4 == 0) head += (head.empty() ? "v" : ",v") + std::to_string(v);
        return parse_query("q(" + head + ") :- " + body);
    }
}

struct InstanceOptions {
    int domain = 3;
    double density = 0.5;
    int max_rows = 5;
    std::set<std::string> deterministic;
};

/// Random database for the relations of `q` (attribute names a0, a1, ...).
inline Database random_instance(std::mt19937_64& rng, const Query& q, const InstanceOptions& opt = {}) {
    DatabaseBuilder b;
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    for (const auto& a : q.atoms) {
        const bool det = opt.deterministic.contains(a.relation);
        std::vector<std::string> attrs;
        for (std::size_t k = 0; k < a.args.size(); ++k) attrs.push_back("a" + std::to_string(k));
        b.relation(a.relation, attrs, det);
        std::vector<std::vector<Constant>> all{{}};
        for (std::size_t k = 0; k < a.args.size(); ++k) {
            std::vector<std::vector<Constant>> next;
            for (const auto& prefix : all)
                for (int c = 1; c <= opt.domain; ++c) {
                    next.push_back(prefix);
                    next.back().push_back(std::int64_t{c});
                }
            all = std::move(next);
        }
        std::shuffle(all.begin(), all.end(), rng);
        int rows = 0;
        for (const auto& t : all) {
            if (rows >= opt.max_rows) break;
            if (std::uniform_real_distribution<double>(0, 1)(rng) > opt.density) continue;
            b.row(a.relation, t, det ? 1.0 : prob(rng));
            ++rows;
        }
    }
    Database db = b.build();
    return db;
}


/// R(x), S(x), T(x,y), U(y) instance with all probabilities 1/2.
inline Database four_atom_db(double p = 0.5) {
    DatabaseBuilder b;
    b.relation("R", {"a"}).relation("S", {"a"}).relation("T", {"a", "b"}).relation("U", {"b"});
    for (std::int64_t v : {1, 2}) {
        b.row("R", {v}, p);
        b.row("S", {v}, p);
        b.row("U", {v}, p);
    }
    b.row("T", {std::int64_t{1}, std::int64_t{1}}, p);
    b.row("T", {std::int64_t{1}, std::int64_t{2}}, p);
    b.row("T", {std::int64_t{2}, std::int64_t{2}}, p);
    return b.build();
}

inline const char* kFourAtomQuery = "q() :- R(x), S(x), T(x,y), U(y)";

/// R(x), S(x,y), T^d(y,z), U(z) instance.
inline Database det_table_db(bool t_det = true) {
    DatabaseBuilder b;
    b.relation("R", {"a"}).relation("S", {"a", "c"}).relation("T", {"c", "e"}, t_det).relation("U", {"e"});
    b.row("R", {"a"}, 0.5).row("R", {"b"}, 0.5);
    b.row("S", {"a", "c"}, 0.5).row("S", {"b", "c"}, 0.5);
    b.row("T", {"c", "e"}, 1.0).row("T", {"c", "f"}, 1.0);
    b.row("U", {"e"}, 0.5).row("U", {"f"}, 0.5);
    return b.build();
}

inline const char* kDetTableQuery = "q() :- R(x), S(x,y), T(y,z), U(z)";

/// R(x), S^d(x,z), T^d(y,z), U(y) instance.
inline Database det_pair_db() {
    DatabaseBuilder b;
    b.relation("R", {"a"}).relation("S", {"a", "c"}, true).relation("T", {"b", "c"}, true).relation("U", {"b"});
    b.row("R", {"a"}, 0.5).row("R", {"b"}, 0.5);
    b.row("S", {"a", "c"}).row("S", {"b", "c"});
    b.row("T", {"e", "c"}).row("T", {"f", "c"});
    b.row("U", {"e"}, 0.5).row("U", {"f"}, 0.5);
    return b.build();
}

inline const char* kDetPairQuery = "q() :- R(x), S(x,z), T(y,z), U(y)";

inline std::string star_query(int k) {
    std::string body, u;
    for (int i = 1; i <= k; ++i) {
        body += "R" + std::to_string(i) + "(x" + std::to_string(i) + "), ";
        u += (i > 1 ? ",x" : "x") + std::to_string(i);
    }
    return "q() :- " + body + "U(" + u + ")";
}

/// R1(x1), R2(x1,x2), ..., Rk(x_{k-1}); k >= 2.
inline std::string chain_query(int k) {
    std::string body = "R1(x1)";
    for (int i = 2; i < k; ++i)
        body += ", R" + std::to_string(i) + "(x" + std::to_string(i - 1) + ",x" + std::to_string(i) + ")";
    body += ", R" + std::to_string(k) + "(x" + std::to_string(k - 1) + ")";
    return "q() :- " + body;
}

inline double rel_diff(double a, double b) {
    const double m = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / m;
}

} // namespace testing
