#include "support.hpp"

#include "propdb/dissociation.hpp"

#include <doctest.h>

using namespace testing;

namespace {

std::vector<std::string> texts(const std::vector<Plan>& plans) {
    std::vector<std::string> out;
    for (const auto& p : plans) out.push_back(p->text);
    return out;
}

// Independent hierarchy check straight from the subgoal-set definition.
bool hierarchical_by_definition(const std::vector<VarSet>& vars, VarSet head) {
    std::map<int, std::set<int>> sg;
    for (std::size_t i = 0; i < vars.size(); ++i)
        (vars[i] - head).for_each([&](int v) { sg[v].insert(static_cast<int>(i)); });
    for (const auto& [x, a] : sg)
        for (const auto& [y, b] : sg) {
            std::vector<int> both;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
            if (!both.empty() && both.size() != a.size() && both.size() != b.size()) return false;
        }
    return true;
}

long long brute_safe_count(const Query& q) {
    const auto slots = dissociation_slots(q);
    long long n = 0;
    for (std::uint64_t m = 0; m < (1ull << slots.size()); ++m) {
        auto vars = q.atom_vars();
        for (std::size_t k = 0; k < slots.size(); ++k)
            if ((m >> k) & 1u) vars[slots[k].first].insert(slots[k].second);
        n += hierarchical_by_definition(vars, q.head_set());
    }
    return n;
}

const char* kRunning = "q() :- R(x,z), S(y,u), T(z), U(u), M(x,y,z,u)";

}

TEST_CASE("safe plans of the introductory queries") {
    auto p1 = safe_plan(parse_query("q1(x) :- R(x,y), S(x)"));
    REQUIRE(p1);
    CHECK((*p1)->text == "join( proj[y] R(x,y), S(x) )");
    auto p2 = safe_plan(parse_query("q() :- R(x,y), S(y,z), T(y,z,u)"));
    REQUIRE(p2);
    CHECK((*p2)->text == "proj[y] join( proj[x] R(x,y), proj[z] join( S(y,z), proj[u] T(y,z,u) ) )");
    CHECK_FALSE(safe_plan(parse_query("q() :- R(x), S(x,y), T(y)")));
}

TEST_CASE("minimal plans of the four-atom query") {
    auto q = parse_query(kFourAtomQuery);
    CHECK(texts(enumerate_minimal_plans(q)) ==
          std::vector<std::string>{"proj[x] join( R(x), S(x), proj[y] join( T(x,y), U(y) ) )",
                                   "proj[y] join( proj[x] join( R(x), S(x), T(x,y) ), U(y) )"});
}

TEST_CASE("minimal plan counts for star and chain queries") {
    const long long fact[] = {1, 1, 2, 6, 24, 120, 720};
    for (int k = 1; k <= 6; ++k) CHECK(enumerate_minimal_plans(parse_query(star_query(k))).size() == fact[k]);
    const long long catalan[] = {1, 1, 2, 5, 14, 42, 132, 429};
    for (int k = 2; k <= 8; ++k) CHECK(enumerate_minimal_plans(parse_query(chain_query(k))).size() == catalan[k - 1]);
}

TEST_CASE("deterministic tables") {
    auto db = load_schema("R(x,z) det\nS(y,u) prob\nT(z) det\nU(u) prob\nM(x,y,z,u) prob\n");
    auto q = parse_query(kRunning, &db);
    CHECK(enumerate_minimal_plans(q).size() == 6);
    CHECK(texts(enumerate_plans_det(q, db)) ==
          std::vector<std::string>{"proj[u] join( proj[y] join( proj[x,z] join( M(x,y,z,u), R(x,z), T(z) ), S(y,u) ), U(u) )"});

    auto all = load_schema("R(a,b) det\nS(b,c) det\nT(c) det\n");
    auto qa = parse_query("q(x) :- R(x,y), S(y,z), T(z)", &all);
    CHECK(texts(enumerate_plans_det(qa, all)) == std::vector<std::string>{"proj[y,z] join( R(x,y), S(y,z), T(z) )"});

    auto none = load_schema("R(x,z) prob\nS(y,u) prob\nT(z) prob\nU(u) prob\nM(x,y,z,u) prob\n");
    auto qn = parse_query(kRunning, &none);
    CHECK(texts(enumerate_plans_det(qn, none)) == texts(enumerate_minimal_plans(qn)));
    CHECK(texts(enumerate_plans_fd(qn, none)) == texts(enumerate_minimal_plans(qn)));
}

TEST_CASE("functional dependencies") {
    auto dbf = load_schema("R(x,z) prob\nS(y,u) prob\nT(z) prob\nU(u) prob\nM(x,y,z,u) prob\n"
                           "fd R: z -> x\nfd S: u -> y\n");
    auto qf = parse_query(kRunning, &dbf);
    CHECK(texts(enumerate_plans_fd(qf, dbf)) ==
          std::vector<std::string>{"proj[x,z] join( proj[y,u] join( M(x,y,z,u), S(y,u), U(u) ), R(x,z), T(z) )",
                                   "proj[y,u] join( proj[x,z] join( M(x,y,z,u), R(x,z), T(z) ), S(y,u), U(u) )"});

    auto dbfd = load_schema("R(x,z) det\nS(y,u) prob\nT(z) det\nU(u) prob\nM(x,y,z,u) prob\n"
                            "fd R: z -> x\nfd S: u -> y\n");
    auto qfd = parse_query(kRunning, &dbfd);
    CHECK(texts(enumerate_plans_fd(qfd, dbfd)) ==
          std::vector<std::string>{"proj[y,u] join( proj[x,z] join( M(x,y,z,u), R(x,z), T(z) ), S(y,u), U(u) )"});

    auto db8 = load_schema("R(a,b,c) prob\nS(a) prob\nU(a,c) prob\nfd R: a -> b\n");
    auto q8 = parse_query("q() :- R(x,y,z), S(x), U(x,z)", &db8);
    CHECK(enumerate_minimal_plans(q8).size() == 1);
    CHECK(texts(enumerate_plans_fd(q8, db8)) ==
          std::vector<std::string>{"proj[x,y] join( proj[z] join( R(x,y,z), U(x,z) ), S(x) )"});
}

TEST_CASE("safe dissociation counts") {
    CHECK(count_safe_dissociations(parse_query("q() :- R(x)")) == 1);
    CHECK(count_safe_dissociations(parse_query(chain_query(3))) == 3);
    CHECK(count_safe_dissociations(parse_query(kFourAtomQuery)) == 5);
    for (int k = 2; k <= 4; ++k) {
        auto q = parse_query(star_query(k));
        CHECK(count_safe_dissociations(q) == brute_safe_count(q));
    }
    for (int k = 2; k <= 5; ++k) {
        auto q = parse_query(chain_query(k));
        CHECK(count_safe_dissociations(q) == brute_safe_count(q));
    }
    CHECK_THROWS_AS(count_safe_dissociations(parse_query(star_query(6))), UsageError);
}

TEST_CASE("soundness, completeness and dichotomy on random queries") {
    std::mt19937_64 rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        auto q = random_query(rng, 2 + static_cast<int>(rng() % 4), 2 + static_cast<int>(rng() % 4), rng() % 3 == 0);
        const auto plans = enumerate_minimal_plans(q);
        REQUIRE_FALSE(plans.empty());
        CHECK((plans.size() == 1) == is_hierarchical(q));
        CHECK((plans.size() == 1) == hierarchical_by_definition(q.atom_vars(), q.head_set()));

        std::vector<Dissociation> ds;
        for (const auto& p : plans) ds.push_back(plan_to_dissociation(q, p));
        for (std::size_t i = 0; i < ds.size(); ++i)
            for (std::size_t j = 0; j < ds.size(); ++j)
                if (i != j) CHECK_FALSE(partial_order_leq(ds[i], ds[j]));

        const auto slots = dissociation_slots(q);
        if (slots.size() > 12) continue;
        ++checked;
        for (std::uint64_t m = 0; m < (1ull << slots.size()); ++m) {
            auto d = dissociation_from_mask(q, slots, m);
            auto vars = q.atom_vars();
            for (int i = 0; i < q.atom_count(); ++i) vars[i] |= d.added[i];
            if (!hierarchical_by_definition(vars, q.head_set())) continue;
            CHECK(std::any_of(ds.begin(), ds.end(), [&](const Dissociation& m2) { return partial_order_leq(m2, d); }));
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("dichotomy with deterministic tables and FDs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        auto q = random_query(rng, 2 + static_cast<int>(rng() % 3), 2 + static_cast<int>(rng() % 3), rng() % 3 == 0);
        std::string schema;
        for (const auto& a : q.atoms) {
            schema += a.relation + "(";
            for (std::size_t k = 0; k < a.args.size(); ++k) schema += (k ? ",a" : "a") + std::to_string(k);
            schema += rng() % 3 == 0 ? ") det\n" : ") prob\n";
            if (a.args.size() >= 2 && rng() % 3 == 0) schema += "fd " + a.relation + ": a0 -> a1\n";
        }
        auto db = load_schema(schema);
        bind_query(q, db);
        const auto plans = enumerate_plans_fd(q, db);
        REQUIRE_FALSE(plans.empty());
        const auto shape = fd_shape(q, db);
        // Dissociating deterministic atoms never changes the reliability.
        std::vector<std::pair<int, int>> slots;
        for (int i = 0; i < q.atom_count(); ++i)
            if (shape.det[i]) (q.evars() - shape.vars[i]).for_each([&](int v) { slots.emplace_back(i, v); });
        bool safe = false;
        for (std::uint64_t m = 0; !safe && m < (1ull << slots.size()); ++m) {
            auto vars = shape.vars;
            for (std::size_t k = 0; k < slots.size(); ++k)
                if ((m >> k) & 1u) vars[slots[k].first].insert(slots[k].second);
            safe = hierarchical_by_definition(vars, q.head_set());
        }
        CHECK((plans.size() == 1) == safe);
    }
}

TEST_CASE("enumeration is deterministic") {
    auto q = parse_query(kRunning);
    CHECK(texts(enumerate_minimal_plans(q)) == texts(enumerate_minimal_plans(q)));
    auto q2 = parse_query(kRunning);
    CHECK(texts(enumerate_minimal_plans(q)) == texts(enumerate_minimal_plans(q2)));
    CHECK(enumerate_minimal_plans(q).size() == 6);
}
