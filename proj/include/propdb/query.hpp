#pragma once

#include "propdb/bitset.hpp"
#include "propdb/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace propdb {

class Database;

enum class PredOp { Eq, Ne, Lt, Le, Gt, Ge, Contains };

/// A variable (var >= 0) or a constant.
struct Term {
    int var = -1;
    Constant value;

    bool is_var() const { return var >= 0; }
};

/// Scan-time filter `var op value`, applied wherever `var` occurs in the atom.
struct Predicate {
    int var = -1;
    PredOp op = PredOp::Eq;
    Constant value;

    bool accepts(const Constant& v) const;
};

struct Atom {
    std::string relation;
    std::vector<Term> args;
    std::vector<Predicate> predicates;
    bool deterministic = false;
    VarSet vars;
};

/// Self-join-free conjunctive query. Variables are numbered by first
/// occurrence in the body; every VarSet in the library indexes into
/// var_names.
class Query {
public:
    std::string name = "q";
    std::vector<std::string> var_names;
    std::vector<int> head;
    std::vector<Atom> atoms;

    int atom_count() const { return static_cast<int>(atoms.size()); }
    AtomSet all_atoms() const { return AtomSet::range(atom_count()); }
    VarSet head_set() const;
    VarSet vars() const;
    VarSet evars() const { return vars() - head_set(); }
    std::vector<VarSet> atom_vars() const;
    int var_index(std::string_view name) const;
    int atom_index(std::string_view relation) const;
    bool boolean() const { return head.empty(); }

    /// Restriction to `atoms` with head = `head` (intersected with their variables).
    Query restrict(AtomSet atoms, VarSet head) const;
    Query with_head(VarSet head) const { return restrict(all_atoms(), head); }

    std::string var_list(VarSet s, std::string_view sep = ",") const;
    std::string render_atom(int i) const;
    std::string to_string() const;
};

/// Parses `q(x,y) :- R(x,z), S(z,y), z <= 5`. With a database the atoms are
/// checked against the schema and deterministic flags are bound.
Query parse_query(std::string_view text, const Database* db = nullptr);

/// Checks the schema and binds deterministic flags. Throws QueryError.
void bind_query(Query& q, const Database& db);

// Structural analysis over per-atom variable sets.

bool is_hierarchical(const std::vector<VarSet>& atom_vars, AtomSet atoms, VarSet head);
std::vector<AtomSet> components(const std::vector<VarSet>& atom_vars, AtomSet atoms, VarSet head);
std::vector<VarSet> top_sets(const std::vector<VarSet>& atom_vars, AtomSet atoms, VarSet head);
VarSet vars_of(const std::vector<VarSet>& atom_vars, AtomSet atoms);

bool is_hierarchical(const Query& q);
std::vector<Query> connected_components(const Query& q);
std::vector<VarSet> top_sets(const Query& q);

/// Existential variables present in every probabilistic atom. Returns
/// nullopt when the query has no probabilistic atom (the caller then uses
/// one multi-join).
std::optional<VarSet> separator_vars(const Query& q, const Database& db);

/// Grid with one row per atom: ∘ original occurrence, • dissociated, ⋆ starred
/// (dissociation that cannot change the reliability).
std::string render_incidence_matrix(const Query& q, const std::vector<VarSet>& added,
                                    const std::vector<VarSet>& starred = {});

} // namespace propdb
