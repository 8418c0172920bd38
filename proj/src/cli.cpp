#include "propdb/cli.hpp"

#include "propdb/dissociation.hpp"
#include "propdb/error.hpp"
#include "propdb/executor.hpp"
#include "propdb/metrics.hpp"
#include "propdb/optimizer.hpp"
#include "propdb/oracle.hpp"
#include "propdb/planner.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace propdb::cli {

namespace {

struct RunConfig {
    std::string schema;
    std::string data;
    std::string query;
    std::string query_file;
    std::string method = "propagation";
    std::string opt = "none";
    std::uint64_t samples = 1000;
    std::uint64_t seed = 42;
    std::string output;
    int k = 10;
    int var_limit = kDefaultVarLimit;
    bool emit_views = false;
    bool matrices = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Loaded {
    std::optional<Database> db;
    Query q;
};

Loaded load(const RunConfig& cfg, bool need_data) {
    Loaded l;
    if (need_data && (cfg.schema.empty() || cfg.data.empty()))
        throw UsageError("this command needs --schema and --data");
    if (!cfg.data.empty() && cfg.schema.empty()) throw UsageError("--data needs --schema");
    if (!cfg.schema.empty()) {
        l.db = cfg.data.empty() ? load_schema(read_file(cfg.schema)) : load_database_files(cfg.schema, cfg.data);
    }
    if (cfg.query.empty() == cfg.query_file.empty()) throw UsageError("give exactly one of --query and --query-file");
    const auto text = cfg.query.empty() ? read_file(cfg.query_file) : cfg.query;
    l.q = parse_query(text, l.db ? &*l.db : nullptr);
    return l;
}

std::vector<VarSet> starred_positions(const Query& q, const Database* db, const Dissociation& d) {
    std::vector<VarSet> star(q.atoms.size());
    if (db == nullptr) return star;
    const auto fd = fd_added_vars(q, *db);
    for (int i = 0; i < q.atom_count(); ++i) {
        if (db->relation(q.atoms[i].relation).deterministic) star[i] = d.added[i];
        else star[i] = d.added[i] & fd[i];
    }
    return star;
}

std::vector<Plan> plans_for(const Query& q, const Database* db) {
    return db ? enumerate_plans_fd(q, *db) : enumerate_minimal_plans(q);
}

std::string cmd_plans(const RunConfig& cfg) {
    auto l = load(cfg, false);
    const Database* db = l.db ? &*l.db : nullptr;
    const Query& q = l.q;
    std::ostringstream out;
    const Pipeline opt = parse_pipeline(cfg.opt);
    if (opt == Pipeline::Single) {
        out << "single\t" << single_plan(q, db)->text << '\n';
    } else {
        const auto plans = plans_for(q, db);
        if (plans.size() == 1) out << "SAFE\n";
        for (std::size_t i = 0; i < plans.size(); ++i) {
            out << 'P' << i + 1 << '\t' << plans[i]->text << '\n';
            if (cfg.matrices) {
                const auto d = plan_to_dissociation(q, plans[i]);
                out << render_incidence_matrix(q, d.added, starred_positions(q, db, d));
            }
        }
    }
    if (cfg.emit_views) out << common_subplans(q, db).render(q);
    return out.str();
}

AnswerTable run_method(const std::string& method, const RunConfig& cfg, const Query& q, const Database& db) {
    if (method == "propagation") return propagation_score(q, db, parse_pipeline(cfg.opt));
    if (method == "exact") return exact_answers(q, db, cfg.var_limit);
    if (method == "mc") return mc_answers(q, db, cfg.samples, cfg.seed);
    if (method == "lineage-rank") {
        AnswerTable t;
        t.columns = q.head;
        for (const auto& [k, s] : rank_by_lineage_size(q, db).items) t.rows.emplace(k, s);
        if (q.head.empty() && t.rows.empty()) t.rows.emplace(ValueTuple{}, 0.0);
        return t;
    }
    if (method.starts_with("plan:")) {
        const auto plans = enumerate_plans_fd(q, db);
        std::size_t idx = 0;
        const auto digits = method.substr(5);
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || idx < 1 || idx > plans.size())
            throw UsageError("plan index must lie in 1.." + std::to_string(plans.size()));
        return reorder(eval_plan(q, plans[idx - 1], db), q.head);
    }
    throw UsageError("unknown method '" + method + "'");
}

void check_config(const RunConfig& cfg, bool opt_given) {
    if (opt_given && cfg.method != "propagation") throw UsageError("--opt applies only to --method propagation");
    parse_pipeline(cfg.opt);
    if (cfg.samples < 1) throw UsageError("--samples must be at least 1");
    if (cfg.k < 1) throw UsageError("--k must be at least 1");
}

std::string cmd_eval(const RunConfig& cfg) {
    auto l = load(cfg, true);
    return answers_tsv(l.q, run_method(cfg.method, cfg, l.q, *l.db));
}

std::string cmd_compare(const RunConfig& cfg) {
    auto l = load(cfg, true);
    const Query& q = l.q;
    const Database& db = *l.db;
    const std::vector<std::string> methods{"exact", "propagation", "mc", "lineage-rank"};
    std::vector<AnswerTable> tables;
    std::vector<double> millis;
    for (const auto& m : methods) {
        const auto t0 = std::chrono::steady_clock::now();
        tables.push_back(run_method(m, cfg, q, db));
        millis.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    const auto truth = top_k_answers(tables[0], cfg.k);
    std::ostringstream out;
    out << "method\tap@" << cfg.k << "\truntime_ms\n";
    for (std::size_t i = 0; i < methods.size(); ++i) {
        char ms[32];
        std::snprintf(ms, sizeof ms, "%.3f", millis[i]);
        out << methods[i] << '\t' << format_score(ap_at_k(ranking_from(tables[i], truth), cfg.k)) << '\t' << ms
            << '\n';
    }
    out << '\n';
    for (int v : q.head) out << q.var_names[v] << '\t';
    for (std::size_t i = 0; i < methods.size(); ++i) out << methods[i] << (i + 1 < methods.size() ? "\t" : "\n");
    for (const auto& [key, _] : ranked_rows(tables[0])) {
        for (const auto& c : key) out << to_string(c) << '\t';
        for (std::size_t i = 0; i < tables.size(); ++i)
            out << format_score(tables[i].score(key)) << (i + 1 < tables.size() ? "\t" : "\n");
    }
    return out.str();
}

std::string cmd_dissociate(const RunConfig& cfg) {
    auto l = load(cfg, false);
    const Database* db = l.db ? &*l.db : nullptr;
    const Query& q = l.q;
    const auto slots = dissociation_slots(q);
    std::ostringstream out;
    out << "free_positions\t" << slots.size() << '\n';
    if (slots.size() <= 20) {
        out << "lattice_size\t" << (std::uint64_t{1} << slots.size()) << '\n';
        out << "safe_dissociations\t" << count_safe_dissociations(q) << '\n';
    } else {
        out << "lattice_size\t2^" << slots.size() << '\n';
        out << "safe_dissociations\tskipped\n";
    }
    const auto plans = plans_for(q, db);
    out << "minimal_plans\t" << plans.size() << '\n';
    out << "hierarchical\t" << (is_hierarchical(q) ? "yes" : "no") << '\n';
    if (cfg.matrices) {
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const auto d = plan_to_dissociation(q, plans[i]);
            out << "\nP" << i + 1 << '\t' << plans[i]->text << '\n';
            out << render_incidence_matrix(q, d.added, starred_positions(q, db, d));
        }
    }
    return out.str();
}

void add_inputs(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--schema", cfg.schema, "Schema file");
    sub->add_option("--data", cfg.data, "Directory with one <relation>.tsv per relation");
    sub->add_option("--query", cfg.query, "Query text");
    sub->add_option("--query-file", cfg.query_file, "File holding the query text");
    sub->add_option("--output", cfg.output, "Write the result here instead of stdout");
}

void add_eval_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--opt", cfg.opt, "Pipeline: none, single, views, semijoin, all");
    sub->add_option("--samples", cfg.samples, "Monte Carlo samples");
    sub->add_option("--seed", cfg.seed, "Monte Carlo seed");
    sub->add_option("--var-limit", cfg.var_limit, "Variable limit of exact inference");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Probabilistic query evaluation by dissociation"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* plans = app.add_subcommand("plans", "Print the minimal plans of a query");
    add_inputs(plans, cfg);
    plans->add_option("--opt", cfg.opt, "none (all plans) or single (one plan with min nodes)");
    plans->add_flag("--emit-views", cfg.emit_views, "Also print the view set");
    plans->add_flag("--matrices", cfg.matrices, "Print the incidence matrix of each plan's dissociation");

    auto* eval = app.add_subcommand("eval", "Score every answer of a query");
    add_inputs(eval, cfg);
    eval->add_option("--method", cfg.method, "propagation, exact, mc, lineage-rank or plan:<i>");
    add_eval_options(eval, cfg);

    auto* compare = app.add_subcommand("compare", "Compare ranking methods against exact inference");
    add_inputs(compare, cfg);
    add_eval_options(compare, cfg);
    compare->add_option("--k", cfg.k, "Cutoff of average precision");

    auto* diss = app.add_subcommand("dissociate", "Dissociation lattice statistics");
    add_inputs(diss, cfg);
    diss->add_flag("--matrices", cfg.matrices, "Print the dissociation of each minimal plan");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        std::string result;
        if (*plans) {
            result = cmd_plans(cfg);
        } else if (*eval) {
            check_config(cfg, eval->count("--opt") > 0);
            result = cmd_eval(cfg);
        } else if (*compare) {
            check_config(cfg, false);
            result = cmd_compare(cfg);
        } else {
            result = cmd_dissociate(cfg);
        }
        if (cfg.output.empty()) {
            out << result;
        } else {
            std::ofstream f(cfg.output, std::ios::binary);
            if (!f) throw UsageError("cannot write '" + cfg.output + "'");
            f << result;
        }
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const OracleInfeasible& e) {
        err << "oracle infeasible: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace propdb::cli
