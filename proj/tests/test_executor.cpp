#include "support.hpp"

#include "propdb/dissociation.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <doctest.h>

using namespace testing;

namespace {

Query safe_random_query(std::mt19937_64& rng) {
    while (true) {
        auto q = random_query(rng, 2 + static_cast<int>(rng() % 3), 2 + static_cast<int>(rng() % 3), rng() % 3 == 0);
        if (is_hierarchical(q)) return q;
    }
}

}

TEST_CASE("independent or") {
    CHECK(ior({0.5, 0.5}) == 0.75);
    CHECK(ior({0.3, 0.0}) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(ior({0.3, 1.0}) == 1.0);
    CHECK(ior({}) == 0.0);
    CHECK_THROWS_AS(ior({1.5}), UsageError);
    CHECK_THROWS_AS(ior({-0.1}), UsageError);
}

TEST_CASE("independent or of many small probabilities") {
    std::vector<double> ps(100000, 1e-7);
    using Big = boost::multiprecision::cpp_bin_float_100;
    const Big ref = 1 - boost::multiprecision::pow(Big(1) - Big(1e-7), 100000);
    const double got = ior(ps);
    CHECK(rel_diff(got, static_cast<double>(ref)) <= 1e-9);
    CHECK(got == doctest::Approx(9.9995e-3).epsilon(1e-4));
}

TEST_CASE("independent or is symmetric and monotone") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> ps(1 + rng() % 8);
        for (auto& p : ps) p = u(rng);
        const double base = ior(ps);
        auto perm = ps;
        std::shuffle(perm.begin(), perm.end(), rng);
        CHECK(std::abs(ior(perm) - base) <= 1e-12);
        const std::size_t half = ps.size() / 2;
        const double left = ior(std::span<const double>(ps.data(), half));
        const double right = ior(std::span<const double>(ps.data() + half, ps.size() - half));
        CHECK(std::abs(ior({left, right}) - base) <= 1e-12);
        auto up = ps;
        const std::size_t i = rng() % up.size();
        up[i] = std::min(1.0, ps[i] + u(rng));
        CHECK(ior(up) >= base - 1e-15);
        CHECK(base >= 0.0);
        CHECK(base <= 1.0);
    }
}

TEST_CASE("plan scores on the four-atom example") {
    auto db = four_atom_db();
    auto q = parse_query(kFourAtomQuery, &db);
    const auto plans = enumerate_minimal_plans(q);
    REQUIRE(plans.size() == 2);
    CHECK(eval_plan(q, plans[0], db).score({}) == 169.0 / 1024);
    CHECK(eval_plan(q, plans[1], db).score({}) == 353.0 / 2048);
    const auto t = propagation_score(q, db);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.score({}) == 169.0 / 1024);
}

TEST_CASE("chain plan on the two-path graph") {
    DatabaseBuilder b;
    b.relation("E1", {"s", "d"}).relation("E2", {"s", "d"}).relation("E3", {"s", "d"});
    b.row("E1", {"s", "a"}, 0.5);
    b.row("E2", {"a", "b"}, 0.5).row("E2", {"a", "c"}, 0.5);
    b.row("E3", {"b", "t"}, 0.5).row("E3", {"c", "t"}, 0.5);
    auto db = b.build();
    auto q = parse_query("q() :- E1('s',x1), E2(x1,x2), E3(x2,'t')", &db);
    auto p = kpartite_propagation_plan(q);
    CHECK(p->text == "proj[x2] join( proj[x1] join( E1('s',x1), E2(x1,x2) ), E3(x2,'t') )");
    CHECK(std::abs(eval_plan(q, p, db).score({}) - 0.234375) <= 1e-12);
    CHECK(std::abs(propagation_score(q, db).score({}) - 0.21875) <= 1e-12);
    CHECK(std::abs(exact_answers(q, db).score({}) - 0.21875) <= 1e-12);
}

TEST_CASE("deterministic table example") {
    auto db = det_table_db();
    auto q = parse_query(kDetTableQuery, &db);
    CHECK(std::abs(propagation_score(q, db).score({}) - 21.0 / 64) <= 1e-12);
    auto probabilistic = det_table_db(false);
    auto qp = parse_query(kDetTableQuery, &probabilistic);
    CHECK(propagation_score(qp, probabilistic).score({}) >= 21.0 / 64 - 1e-12);
}

TEST_CASE("empty Boolean result scores zero") {
    auto db = load_database("R(A) prob\nS(A) prob\n", {{"R", "A\t_p\n1\t0.5\n"}, {"S", "A\t_p\n2\t0.5\n"}});
    auto q = parse_query("q() :- R(x), S(x)", &db);
    const auto t = propagation_score(q, db);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.score({}) == 0.0);
    auto qh = parse_query("q(x) :- R(x), S(x)", &db);
    CHECK(propagation_score(qh, db).rows.empty());
}

TEST_CASE("safe plans are exact") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 200; ++trial) {
        auto q = safe_random_query(rng);
        auto db = random_instance(rng, q, {.domain = 3, .density = 0.5, .max_rows = 5});
        bind_query(q, db);
        const auto got = reorder(eval_plan(q, *safe_plan(q), db), q.head);
        const auto truth = exact_answers(q, db);
        REQUIRE(got.rows.size() == truth.rows.size());
        for (const auto& [key, r] : truth.rows) CHECK(std::abs(got.score(key) - r) <= 1e-12);
    }
}

TEST_CASE("every safe dissociation plan bounds the reliability from above") {
    std::mt19937_64 rng(61);
    int plans_checked = 0;
    for (int trial = 0; trial < 80; ++trial) {
        auto q = random_query(rng, 2 + static_cast<int>(rng() % 3), 2 + static_cast<int>(rng() % 2), rng() % 3 == 0);
        const auto slots = dissociation_slots(q);
        if (slots.size() > 8) continue;
        auto db = random_instance(rng, q, {.domain = 3, .density = 0.6, .max_rows = 4});
        bind_query(q, db);
        const auto truth = exact_answers(q, db).rows;
        for (std::uint64_t m = 0; m < (1ull << slots.size()); ++m) {
            auto d = dissociation_from_mask(q, slots, m);
            if (!is_safe_dissociation(q, d)) continue;
            ++plans_checked;
            const auto t = reorder(eval_plan(q, dissociation_to_plan(q, d), db), q.head);
            for (const auto& [key, r] : truth) {
                CHECK(t.score(key) >= r - 1e-12);
                CHECK(t.score(key) <= 1.0);
            }
        }
    }
    CHECK(plans_checked > 200);
}

TEST_CASE("relative error shrinks with small probabilities") {
    auto db = four_atom_db();
    auto q = parse_query(kFourAtomQuery, &db);
    double last = 1e300;
    for (double f : {1.0, 0.1, 0.01}) {
        auto scaled = scale_probabilities(db, f);
        const double rho = propagation_score(q, scaled).score({});
        const double r = to_double(world_enumeration(q, scaled).at({}));
        const double err = (rho - r) / r;
        CHECK(err > 0);
        CHECK(err < last);
        last = err;
    }
}

TEST_CASE("table helpers") {
    AnswerTable a{{0}, {{{std::int64_t{1}}, 0.5}, {{std::int64_t{2}}, 0.2}}};
    AnswerTable b{{0}, {{{std::int64_t{1}}, 0.4}}};
    auto m = min_tables({a, b});
    CHECK(m.score({std::int64_t{1}}) == 0.4);
    CHECK(m.score({std::int64_t{2}}) == 0.0);
    AnswerTable c{{1}, {}};
    CHECK_THROWS(min_tables({a, c}));

    AnswerTable two{{0, 1}, {{{std::int64_t{1}, std::int64_t{2}}, 0.5}}};
    auto swapped = reorder(two, {1, 0});
    CHECK(swapped.score({std::int64_t{2}, std::int64_t{1}}) == 0.5);

    CHECK(format_score(0.1650390625) == "0.1650390625");
    CHECK(format_score(0.1) == "0.1");
    CHECK(format_score(1.0) == "1");
    CHECK(std::stod(format_score(1.0 / 3)) == 1.0 / 3);

    auto q = parse_query("q(x) :- R(x)");
    AnswerTable t{{0}, {{{std::string("b")}, 0.5}, {{std::string("a")}, 0.5}, {{std::string("c")}, 0.9}}};
    CHECK(answers_tsv(q, t) == "x\tscore\nc\t0.9\na\t0.5\nb\t0.5\n");
    for (auto p : {Pipeline::None, Pipeline::Single, Pipeline::Views, Pipeline::Semijoin, Pipeline::All})
        CHECK(parse_pipeline(pipeline_name(p)) == p);
    CHECK_THROWS_AS(parse_pipeline("fast"), UsageError);
}
