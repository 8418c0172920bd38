#pragma once

#include "propdb/executor.hpp"
#include "propdb/model.hpp"
#include "propdb/plan.hpp"
#include "propdb/query.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace propdb {

/// Positive DNF over tuple events. Clauses are sorted tuple-id lists.
struct LineageDNF {
    std::vector<std::vector<TupleId>> clauses;
    std::map<TupleId, Probability> var_probs;
    std::map<TupleId, std::string> partition;

    std::string to_text() const;
};

using Lineage = std::map<ValueTuple, LineageDNF>;

/// One DNF per answer (keyed by head values in head order); one clause per
/// join result.
Lineage lineage(const Query& q, const Database& db);

inline constexpr int kDefaultVarLimit = 30;

/// Exact probability by component factoring and Shannon expansion. Throws
/// OracleInfeasible when an independent component has more than `var_limit`
/// uncertain variables.
Probability exact_prob(const LineageDNF& dnf, int var_limit = kDefaultVarLimit);

/// Fraction of sampled worlds satisfying the DNF. Sample i draws from a
/// stream keyed by (seed, i).
Probability mc_estimate(const LineageDNF& dnf, std::uint64_t samples, std::uint64_t seed);

/// Per-answer tables in the query's head order; a Boolean query always has
/// one row.
AnswerTable exact_answers(const Query& q, const Database& db, int var_limit = kDefaultVarLimit);
AnswerTable mc_answers(const Query& q, const Database& db, std::uint64_t samples, std::uint64_t seed);

struct Edge {
    int from = 0;
    int to = 0;
    Probability p = 1.0;
};

/// Layers 0..k with a single source in layer 0 and a single target in layer
/// k; edges[i] runs from layer i to layer i+1.
struct KPartiteGraph {
    std::vector<int> layer_sizes;
    std::vector<std::vector<Edge>> edges;

    int k() const { return static_cast<int>(edges.size()); }
};

/// The graph as edge relations E1..Ek plus the chain query from s to t.
std::pair<Database, Query> kpartite_instance(const KPartiteGraph& g);
/// Plan that pushes the source forward one layer at a time.
Plan kpartite_propagation_plan(const Query& chain);

Probability kpartite_reliability(const KPartiteGraph& g, int var_limit = kDefaultVarLimit);
Probability kpartite_propagation(const KPartiteGraph& g);

} // namespace propdb
