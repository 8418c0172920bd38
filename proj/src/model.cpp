#include "propdb/model.hpp"

#include "propdb/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace propdb {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

std::string format_prob(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    return buf;
}

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

} // namespace

std::string to_string(const Constant& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

Constant parse_constant(std::string_view token) {
    std::int64_t v = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && !(token.size() > 1 && token[0] == '+')) {
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec == std::errc{} && ptr == last) return v;
    }
    return std::string(token);
}

int RelationDef::attribute_index(std::string_view attr) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i] == attr) return static_cast<int>(i);
    return -1;
}

const RelationDef* Database::find(std::string_view name) const {
    auto it = relations_.find(name);
    return it == relations_.end() ? nullptr : &it->second;
}

const RelationDef& Database::relation(std::string_view name) const {
    if (const auto* r = find(name)) return *r;
    throw DataError("unknown relation '" + std::string(name) + "'");
}

std::size_t Database::tuple_count() const {
    std::size_t n = 0;
    for (const auto& [_, r] : relations_) n += r.rows.size();
    return n;
}

DatabaseBuilder::DatabaseBuilder(const Database& base)
    : relations_(base.relations_), fds_(base.fds_), next_id_(base.next_id_) {}

DatabaseBuilder& DatabaseBuilder::relation(std::string name, std::vector<std::string> attributes, bool deterministic) {
    if (relations_.contains(name)) throw DataError("duplicate relation '" + name + "'");
    RelationDef r;
    r.name = name;
    r.attributes = std::move(attributes);
    r.deterministic = deterministic;
    relations_.emplace(std::move(name), std::move(r));
    return *this;
}

DatabaseBuilder& DatabaseBuilder::row(std::string_view relation, std::vector<Constant> values, Probability prob) {
    auto it = relations_.find(relation);
    if (it == relations_.end()) throw DataError("row for unknown relation '" + std::string(relation) + "'");
    it->second.rows.push_back(TupleRow{next_id_++, std::move(values), prob});
    return *this;
}

DatabaseBuilder& DatabaseBuilder::fd(std::string relation, std::vector<std::string> determinant,
                                     std::vector<std::string> dependent) {
    fds_.push_back(FunctionalDependency{std::move(relation), std::move(determinant), std::move(dependent)});
    return *this;
}

DatabaseBuilder& DatabaseBuilder::put_relation(RelationDef rel) {
    for (const auto& row : rel.rows) next_id_ = std::max<TupleId>(next_id_, row.id + 1);
    auto name = rel.name;
    relations_.insert_or_assign(std::move(name), std::move(rel));
    return *this;
}

DatabaseBuilder& DatabaseBuilder::drop_relation(std::string_view name) {
    if (auto it = relations_.find(name); it != relations_.end()) relations_.erase(it);
    return *this;
}

Database DatabaseBuilder::build() const {
    Database db;
    db.relations_ = relations_;
    db.fds_ = fds_;
    db.next_id_ = next_id_;

    std::set<TupleId> ids;
    for (const auto& [name, rel] : db.relations_) {
        if (!is_identifier(name.substr(0, name.find('~')))) throw DataError("invalid relation name '" + name + "'");
        std::set<std::string> attrs(rel.attributes.begin(), rel.attributes.end());
        if (attrs.size() != rel.attributes.size()) throw DataError("relation '" + name + "' repeats an attribute name");
        std::set<std::vector<Constant>> seen;
        for (const auto& row : rel.rows) {
            if (row.values.size() != rel.arity())
                throw DataError("relation '" + name + "': row with " + std::to_string(row.values.size()) +
                                " values, expected " + std::to_string(rel.arity()));
            if (!(row.prob >= 0.0 && row.prob <= 1.0))
                throw DataError("relation '" + name + "': probability " + format_prob(row.prob) + " outside [0,1]");
            if (rel.deterministic && row.prob != 1.0)
                throw DataError("deterministic relation '" + name + "' has a row with probability " +
                                format_prob(row.prob));
            if (!seen.insert(row.values).second)
                throw DataError("relation '" + name + "' contains a duplicate row");
            if (!ids.insert(row.id).second) throw DataError("tuple id " + std::to_string(row.id) + " used twice");
            for (const auto& v : row.values) db.active_domain_.insert(v);
        }
    }

    for (const auto& fd : db.fds_) {
        const auto* rel = db.find(fd.relation);
        if (rel == nullptr) throw DataError("FD on unknown relation '" + fd.relation + "'");
        auto positions = [&](const std::vector<std::string>& names) {
            std::vector<int> pos;
            for (const auto& a : names) {
                const int i = rel->attribute_index(a);
                if (i < 0) throw DataError("FD on '" + fd.relation + "' names unknown attribute '" + a + "'");
                pos.push_back(i);
            }
            return pos;
        };
        const auto lhs = positions(fd.determinant);
        const auto rhs = positions(fd.dependent);
        std::map<std::vector<Constant>, std::vector<Constant>> image;
        for (const auto& row : rel->rows) {
            std::vector<Constant> key, val;
            for (int i : lhs) key.push_back(row.values[i]);
            for (int i : rhs) val.push_back(row.values[i]);
            auto [it, inserted] = image.emplace(std::move(key), val);
            if (!inserted && it->second != val)
                throw DataError("FD on '" + fd.relation + "' violated by the data");
        }
    }
    return db;
}

Database load_database(std::string_view schema_text,
                       const std::map<std::string, std::string, std::less<>>& data_sources) {
    DatabaseBuilder b;
    std::vector<std::string> names;
    std::map<std::string, bool> det;
    std::istringstream in{std::string(schema_text)};
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto line = trim(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.starts_with("fd ") || line.starts_with("fd\t")) {
            const auto colon = line.find(':');
            const auto arrow = line.find("->");
            if (colon == std::string_view::npos || arrow == std::string_view::npos || arrow < colon)
                throw DataError(where("schema", lineno) + "expected 'fd name: attr,... -> attr,...'");
            const auto rel = std::string(trim(line.substr(2, colon - 2)));
            auto lhs = split(line.substr(colon + 1, arrow - colon - 1), ',');
            auto rhs = split(line.substr(arrow + 2), ',');
            b.fd(rel, std::move(lhs), std::move(rhs));
            continue;
        }
        const auto open = line.find('(');
        const auto close = line.find(')');
        if (open == std::string_view::npos || close == std::string_view::npos || close < open)
            throw DataError(where("schema", lineno) + "expected 'name(attr,...) prob|det'");
        const auto name = std::string(trim(line.substr(0, open)));
        auto attrs = split(line.substr(open + 1, close - open - 1), ',');
        if (attrs.size() == 1 && attrs[0].empty()) attrs.clear();
        const auto kind = trim(line.substr(close + 1));
        if (kind != "prob" && kind != "det")
            throw DataError(where("schema", lineno) + "relation kind must be 'prob' or 'det'");
        for (const auto& a : attrs)
            if (!is_identifier(a) || a == "_p") throw DataError(where("schema", lineno) + "bad attribute '" + a + "'");
        if (det.contains(name)) throw DataError(where("schema", lineno) + "duplicate relation '" + name + "'");
        det[name] = kind == "det";
        b.relation(name, std::move(attrs), kind == "det");
        names.push_back(name);
    }

    for (const auto& [src, _] : data_sources)
        if (!det.contains(src)) throw DataError("data source '" + src + "' has no schema entry");

    Database schema_only = DatabaseBuilder(b).build();
    for (const auto& name : names) {
        auto it = data_sources.find(name);
        if (it == data_sources.end()) throw DataError("no data for relation '" + name + "'");
        const auto& rel = schema_only.relation(name);
        std::istringstream data{it->second};
        std::string header;
        std::size_t ln = 1;
        if (!std::getline(data, header)) throw DataError(where(name + ".tsv", 1) + "missing header");
        if (!header.empty() && header.back() == '\r') header.pop_back();
        auto cols = header.empty() ? std::vector<std::string>{} : split(header, '\t');
        const bool has_p = !cols.empty() && cols.back() == "_p";
        if (rel.deterministic && has_p)
            throw DataError(where(name + ".tsv", 1) + "deterministic relation must not carry a '_p' column");
        if (!rel.deterministic && !has_p)
            throw DataError(where(name + ".tsv", 1) + "probabilistic relation needs a final '_p' column");
        if (has_p) cols.pop_back();
        if (cols != rel.attributes) throw DataError(where(name + ".tsv", 1) + "header does not match schema");
        std::string raw_row;
        while (std::getline(data, raw_row)) {
            ++ln;
            if (!raw_row.empty() && raw_row.back() == '\r') raw_row.pop_back();
            if (trim(raw_row).empty()) continue;
            auto fields = split(raw_row, '\t');
            const std::size_t expected = rel.arity() + (has_p ? 1 : 0);
            if (fields.size() != expected)
                throw DataError(where(name + ".tsv", ln) + "expected " + std::to_string(expected) + " fields, got " +
                                std::to_string(fields.size()));
            double p = 1.0;
            if (has_p) {
                const auto& f = fields.back();
                auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), p);
                if (ec != std::errc{} || ptr != f.data() + f.size())
                    throw DataError(where(name + ".tsv", ln) + "unparseable probability '" + f + "'");
                if (!(p >= 0.0 && p <= 1.0))
                    throw DataError(where(name + ".tsv", ln) + "probability " + f + " outside [0,1]");
                fields.pop_back();
            }
            std::vector<Constant> values;
            for (const auto& f : fields) values.push_back(parse_constant(f));
            b.row(name, std::move(values), p);
        }
    }
    return b.build();
}

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

Database load_schema(std::string_view schema) {
    std::map<std::string, std::string, std::less<>> headers;
    std::istringstream in{std::string(schema)};
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (const auto hash = t.find('#'); hash != std::string_view::npos) t = trim(t.substr(0, hash));
        if (t.empty() || t.starts_with("fd ") || t.starts_with("fd\t")) continue;
        const auto open = t.find('(');
        const auto close = t.find(')');
        if (open == std::string_view::npos || close == std::string_view::npos || close < open) continue;
        auto attrs = split(t.substr(open + 1, close - open - 1), ',');
        if (attrs.size() == 1 && attrs[0].empty()) attrs.clear();
        if (trim(t.substr(close + 1)) == "prob") attrs.push_back("_p");
        std::string header;
        for (std::size_t i = 0; i < attrs.size(); ++i) header += (i ? "\t" : "") + attrs[i];
        headers[std::string(trim(t.substr(0, open)))] = header + "\n";
    }
    return load_database(schema, headers);
}

Database load_database_files(const std::filesystem::path& schema_path, const std::filesystem::path& data_dir) {
    const auto schema = slurp(schema_path);
    const auto skeleton = load_schema(schema);
    std::map<std::string, std::string, std::less<>> sources;
    for (const auto& [name, _] : skeleton.relations()) sources[name] = slurp(data_dir / (name + ".tsv"));
    return load_database(schema, sources);
}

std::string schema_text(const Database& db) {
    std::ostringstream out;
    for (const auto& [name, rel] : db.relations()) {
        out << name << '(';
        for (std::size_t i = 0; i < rel.attributes.size(); ++i) out << (i ? "," : "") << rel.attributes[i];
        out << ") " << (rel.deterministic ? "det" : "prob") << '\n';
    }
    for (const auto& fd : db.fds()) {
        out << "fd " << fd.relation << ": ";
        for (std::size_t i = 0; i < fd.determinant.size(); ++i) out << (i ? "," : "") << fd.determinant[i];
        out << " -> ";
        for (std::size_t i = 0; i < fd.dependent.size(); ++i) out << (i ? "," : "") << fd.dependent[i];
        out << '\n';
    }
    return out.str();
}

std::string relation_tsv(const RelationDef& rel) {
    std::ostringstream out;
    for (std::size_t i = 0; i < rel.attributes.size(); ++i) out << (i ? "\t" : "") << rel.attributes[i];
    if (!rel.deterministic) out << (rel.attributes.empty() ? "" : "\t") << "_p";
    out << '\n';
    for (const auto& row : rel.rows) {
        for (std::size_t i = 0; i < row.values.size(); ++i) out << (i ? "\t" : "") << to_string(row.values[i]);
        if (!rel.deterministic) out << (row.values.empty() ? "" : "\t") << format_prob(row.prob);
        out << '\n';
    }
    return out.str();
}

Database scale_probabilities(const Database& db, double f) {
    if (!(f > 0.0 && f <= 1.0)) throw UsageError("scale factor must lie in (0,1]");
    DatabaseBuilder b(db);
    for (const auto& [name, rel] : db.relations()) {
        if (rel.deterministic) continue;
        RelationDef scaled = rel;
        for (auto& row : scaled.rows) row.prob *= f;
        b.put_relation(std::move(scaled));
    }
    return b.build();
}

} // namespace propdb
