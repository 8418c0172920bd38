#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace propdb {

/// A database constant: either a 64-bit integer or a UTF-8 string.
using Constant = std::variant<std::int64_t, std::string>;
using TupleId = std::uint32_t;
using Probability = double;

std::string to_string(const Constant& c);

/// Integers are recognised when the whole token is a base-10 int64;
/// everything else is a string.
Constant parse_constant(std::string_view token);

struct TupleRow {
    TupleId id = 0;
    std::vector<Constant> values;
    Probability prob = 1.0;
};

struct RelationDef {
    std::string name;
    std::vector<std::string> attributes;
    bool deterministic = false;
    std::vector<TupleRow> rows;

    std::size_t arity() const { return attributes.size(); }
    /// Position of `attr`, or -1.
    int attribute_index(std::string_view attr) const;
};

struct FunctionalDependency {
    std::string relation;
    std::vector<std::string> determinant;
    std::vector<std::string> dependent;
};

/// Immutable tuple-independent probabilistic database. Construct through
/// DatabaseBuilder or the loaders below.
class Database {
public:
    const std::map<std::string, RelationDef, std::less<>>& relations() const { return relations_; }
    const std::vector<FunctionalDependency>& fds() const { return fds_; }
    const std::set<Constant>& active_domain() const { return active_domain_; }

    const RelationDef* find(std::string_view name) const;
    /// Throws DataError when the relation does not exist.
    const RelationDef& relation(std::string_view name) const;

    /// One past the largest tuple id in use.
    TupleId next_tuple_id() const { return next_id_; }
    std::size_t tuple_count() const;

private:
    friend class DatabaseBuilder;
    std::map<std::string, RelationDef, std::less<>> relations_;
    std::vector<FunctionalDependency> fds_;
    std::set<Constant> active_domain_;
    TupleId next_id_ = 0;
};

/// Accumulates relations, rows and FDs, then validates everything in build().
/// Row ids are assigned densely in insertion order unless given explicitly.
class DatabaseBuilder {
public:
    DatabaseBuilder() = default;
    /// Starts from a copy of an existing database (ids are preserved).
    explicit DatabaseBuilder(const Database& base);

    DatabaseBuilder& relation(std::string name, std::vector<std::string> attributes, bool deterministic = false);
    DatabaseBuilder& row(std::string_view relation, std::vector<Constant> values, Probability prob = 1.0);
    DatabaseBuilder& fd(std::string relation, std::vector<std::string> determinant, std::vector<std::string> dependent);

    /// Adds or replaces a whole relation, keeping the ids already set on its rows.
    DatabaseBuilder& put_relation(RelationDef rel);
    DatabaseBuilder& drop_relation(std::string_view name);

    TupleId allocate_id() { return next_id_++; }

    /// Validates arity, probability range, determinism, set semantics, id
    /// uniqueness and every FD against the data. Throws DataError.
    Database build() const;

private:
    std::map<std::string, RelationDef, std::less<>> relations_;
    std::vector<FunctionalDependency> fds_;
    TupleId next_id_ = 0;
};

/// Parses the plain-text schema plus one TSV text per relation.
Database load_database(std::string_view schema_text,
                       const std::map<std::string, std::string, std::less<>>& data_sources);

/// Schema with every relation empty.
Database load_schema(std::string_view schema_text);

/// Reads `schema_path` and `<data_dir>/<relation>.tsv` for every relation.
Database load_database_files(const std::filesystem::path& schema_path, const std::filesystem::path& data_dir);

std::string schema_text(const Database& db);
std::string relation_tsv(const RelationDef& rel);

/// Multiplies every probabilistic tuple's probability by f, 0 < f <= 1.
Database scale_probabilities(const Database& db, double f);

} // namespace propdb
