#include "propdb/query.hpp"

#include "propdb/error.hpp"
#include "propdb/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace propdb {

bool Predicate::accepts(const Constant& v) const {
    if (op == PredOp::Contains) {
        const auto* s = std::get_if<std::string>(&v);
        return s != nullptr && s->find(std::get<std::string>(value)) != std::string::npos;
    }
    if (op == PredOp::Eq) return v == value;
    if (op == PredOp::Ne) return v != value;
    const auto* a = std::get_if<std::int64_t>(&v);
    if (a == nullptr) return false;
    const auto b = std::get<std::int64_t>(value);
    switch (op) {
    case PredOp::Lt: return *a < b;
    case PredOp::Le: return *a <= b;
    case PredOp::Gt: return *a > b;
    case PredOp::Ge: return *a >= b;
    default: return false;
    }
}

VarSet Query::head_set() const {
    VarSet s;
    for (int v : head) s.insert(v);
    return s;
}

VarSet Query::vars() const {
    VarSet s;
    for (const auto& a : atoms) s |= a.vars;
    return s;
}

std::vector<VarSet> Query::atom_vars() const {
    std::vector<VarSet> out;
    for (const auto& a : atoms) out.push_back(a.vars);
    return out;
}

int Query::var_index(std::string_view n) const {
    for (std::size_t i = 0; i < var_names.size(); ++i)
        if (var_names[i] == n) return static_cast<int>(i);
    return -1;
}

int Query::atom_index(std::string_view relation) const {
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i].relation == relation) return static_cast<int>(i);
    return -1;
}

Query Query::restrict(AtomSet keep, VarSet new_head) const {
    Query out;
    out.name = name;
    out.var_names = var_names;
    VarSet present;
    keep.for_each([&](int i) {
        out.atoms.push_back(atoms[i]);
        present |= atoms[i].vars;
    });
    for (int v = 0; v < static_cast<int>(var_names.size()); ++v)
        if (new_head.contains(v) && present.contains(v)) out.head.push_back(v);
    return out;
}

std::string Query::var_list(VarSet s, std::string_view sep) const {
    std::string out;
    s.for_each([&](int v) {
        if (!out.empty()) out += sep;
        out += var_names[v];
    });
    return out;
}

namespace {

std::string render_constant(const Constant& c) {
    if (std::holds_alternative<std::int64_t>(c)) return to_string(c);
    return "'" + std::get<std::string>(c) + "'";
}

const char* op_text(PredOp op) {
    switch (op) {
    case PredOp::Eq: return "=";
    case PredOp::Ne: return "!=";
    case PredOp::Lt: return "<";
    case PredOp::Le: return "<=";
    case PredOp::Gt: return ">";
    case PredOp::Ge: return ">=";
    case PredOp::Contains: return "~";
    }
    return "?";
}

} // namespace

std::string Query::render_atom(int i) const {
    const auto& a = atoms[i];
    std::string out = a.relation + "(";
    for (std::size_t j = 0; j < a.args.size(); ++j) {
        if (j) out += ",";
        out += a.args[j].is_var() ? var_names[a.args[j].var] : render_constant(a.args[j].value);
    }
    return out + ")";
}

std::string Query::to_string() const {
    std::string out = name + "(";
    for (std::size_t i = 0; i < head.size(); ++i) out += (i ? "," : "") + var_names[head[i]];
    out += ") :- ";
    for (int i = 0; i < atom_count(); ++i) {
        if (i) out += ", ";
        out += render_atom(i);
    }
    std::vector<std::string> preds;
    for (const auto& a : atoms)
        for (const auto& p : a.predicates) {
            auto s = var_names[p.var] + " " + op_text(p.op) + " " + render_constant(p.value);
            if (std::find(preds.begin(), preds.end(), s) == preds.end()) preds.push_back(s);
        }
    for (const auto& p : preds) out += ", " + p;
    return out;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    Query parse() {
        Query q;
        skip();
        q.name = identifier("query name");
        expect('(');
        std::vector<std::string> head_names;
        if (!peek(')')) {
            do head_names.push_back(identifier("head variable"));
            while (accept(','));
        }
        expect(')');
        skip();
        if (!(s_.substr(pos_, 2) == ":-")) fail("expected ':-'");
        pos_ += 2;

        struct RawPred { std::string var; PredOp op; Constant value; };
        std::vector<RawPred> preds;
        do {
            skip();
            const auto save = pos_;
            auto name = identifier("atom or predicate");
            skip();
            if (peek('(')) {
                expect('(');
                Atom a;
                a.relation = name;
                if (!peek(')')) {
                    do a.args.push_back(term(q));
                    while (accept(','));
                }
                expect(')');
                for (const auto& t : a.args)
                    if (t.is_var()) a.vars.insert(t.var);
                q.atoms.push_back(std::move(a));
            } else {
                pos_ = save;
                auto var = identifier("variable");
                auto op = pred_op();
                auto value = constant();
                if (op == PredOp::Contains && !std::holds_alternative<std::string>(value))
                    fail("substring match needs a string constant");
                if ((op == PredOp::Lt || op == PredOp::Le || op == PredOp::Gt || op == PredOp::Ge) &&
                    !std::holds_alternative<std::int64_t>(value))
                    fail("comparison needs an integer constant");
                preds.push_back({var, op, value});
            }
        } while (accept(','));
        accept('.');
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        if (q.atoms.empty()) fail("query body has no atoms");

        for (std::size_t i = 0; i < q.atoms.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (q.atoms[i].relation == q.atoms[j].relation)
                    throw QueryError("self-join on relation '" + q.atoms[i].relation + "' is not supported");
        for (const auto& h : head_names) {
            const int v = q.var_index(h);
            if (v < 0) throw QueryError("head variable '" + h + "' does not occur in the body");
            if (std::find(q.head.begin(), q.head.end(), v) != q.head.end())
                throw QueryError("head variable '" + h + "' listed twice");
            q.head.push_back(v);
        }
        for (const auto& p : preds) {
            const int v = q.var_index(p.var);
            if (v < 0) throw QueryError("predicate on unknown variable '" + p.var + "'");
            for (auto& a : q.atoms)
                if (a.vars.contains(v)) a.predicates.push_back(Predicate{v, p.op, p.value});
        }
        return q;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw QueryError("query syntax error at offset " + std::to_string(pos_) + ": " + msg);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    bool accept(char c) {
        if (!peek(c)) return false;
        ++pos_;
        return true;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    std::string identifier(const char* what) {
        skip();
        const auto start = pos_;
        if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
        }
        if (pos_ == start) fail(std::string("expected ") + what);
        return std::string(s_.substr(start, pos_ - start));
    }

    Constant constant() {
        skip();
        if (pos_ < s_.size() && (s_[pos_] == '\'' || s_[pos_] == '"')) {
            const char quote = s_[pos_++];
            const auto end = s_.find(quote, pos_);
            if (end == std::string_view::npos) fail("unterminated string constant");
            std::string v(s_.substr(pos_, end - pos_));
            pos_ = end + 1;
            return v;
        }
        const auto start = pos_;
        if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc{} || ptr != s_.data() + pos_ || pos_ == start) {
            pos_ = start;
            fail("expected a constant");
        }
        return v;
    }

    Term term(Query& q) {
        skip();
        if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            auto name = identifier("variable");
            int v = q.var_index(name);
            if (v < 0) {
                if (q.var_names.size() >= 64) fail("too many variables");
                v = static_cast<int>(q.var_names.size());
                q.var_names.push_back(name);
            }
            return Term{v, {}};
        }
        return Term{-1, constant()};
    }

    PredOp pred_op() {
        skip();
        auto rest = s_.substr(pos_);
        static const std::pair<std::string_view, PredOp> ops[] = {
            {"<=", PredOp::Le}, {">=", PredOp::Ge}, {"!=", PredOp::Ne}, {"<>", PredOp::Ne},
            {"≤", PredOp::Le}, {"≥", PredOp::Ge}, {"≠", PredOp::Ne},
            {"<", PredOp::Lt}, {">", PredOp::Gt}, {"=", PredOp::Eq}, {"~", PredOp::Contains},
            {"like", PredOp::Contains}};
        for (const auto& [text, op] : ops) {
            if (rest.starts_with(text)) {
                pos_ += text.size();
                return op;
            }
        }
        fail("expected a comparison operator");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace

Query parse_query(std::string_view text, const Database* db) {
    Query q = Parser(text).parse();
    if (db != nullptr) bind_query(q, *db);
    return q;
}

void bind_query(Query& q, const Database& db) {
    for (auto& a : q.atoms) {
        const auto* rel = db.find(a.relation);
        if (rel == nullptr) throw QueryError("unknown relation '" + a.relation + "'");
        if (rel->arity() != a.args.size())
            throw QueryError("relation '" + a.relation + "' has arity " + std::to_string(rel->arity()) +
                             ", query uses " + std::to_string(a.args.size()));
        a.deterministic = rel->deterministic;
    }
}

VarSet vars_of(const std::vector<VarSet>& atom_vars, AtomSet atoms) {
    VarSet s;
    atoms.for_each([&](int i) { s |= atom_vars[i]; });
    return s;
}

bool is_hierarchical(const std::vector<VarSet>& atom_vars, AtomSet atoms, VarSet head) {
    const VarSet ev = vars_of(atom_vars, atoms) - head;
    std::vector<AtomSet> sg;
    ev.for_each([&](int v) {
        AtomSet s;
        atoms.for_each([&](int i) {
            if (atom_vars[i].contains(v)) s.insert(i);
        });
        sg.push_back(s);
    });
    for (std::size_t i = 0; i < sg.size(); ++i)
        for (std::size_t j = i + 1; j < sg.size(); ++j)
            if (sg[i].intersects(sg[j]) && !sg[i].subset_of(sg[j]) && !sg[j].subset_of(sg[i])) return false;
    return true;
}

std::vector<AtomSet> components(const std::vector<VarSet>& atom_vars, AtomSet atoms, VarSet head) {
    std::vector<AtomSet> out;
    AtomSet left = atoms;
    while (!left.empty()) {
        AtomSet comp = AtomSet::single(left.first());
        VarSet reach = atom_vars[left.first()] - head;
        bool grew = true;
        while (grew) {
            grew = false;
            (left - comp).for_each([&](int i) {
                if (atom_vars[i].intersects(reach)) {
                    comp.insert(i);
                    reach |= atom_vars[i] - head;
                    grew = true;
                }
            });
        }
        out.push_back(comp);
        left -= comp;
    }
    return out;
}

std::vector<VarSet> top_sets(const std::vector<VarSet>& atom_vars, AtomSet atoms, VarSet head) {
    const VarSet ev = vars_of(atom_vars, atoms) - head;
    if (atoms.size() <= 1) return {ev};
    const auto evs = ev.elements();
    const int n = static_cast<int>(evs.size());
    std::vector<std::uint64_t> by_size;
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m) by_size.push_back(m);
    std::stable_sort(by_size.begin(), by_size.end(),
                     [](std::uint64_t a, std::uint64_t b) { return std::popcount(a) < std::popcount(b); });
    std::vector<VarSet> out;
    for (auto m : by_size) {
        VarSet y;
        for (int b = 0; b < n; ++b)
            if ((m >> b) & 1u) y.insert(evs[b]);
        if (std::any_of(out.begin(), out.end(), [&](VarSet t) { return t.subset_of(y); })) continue;
        if (components(atom_vars, atoms, head | y).size() > 1) out.push_back(y);
    }
    return out;
}

bool is_hierarchical(const Query& q) { return is_hierarchical(q.atom_vars(), q.all_atoms(), q.head_set()); }

std::vector<Query> connected_components(const Query& q) {
    std::vector<Query> out;
    for (auto c : components(q.atom_vars(), q.all_atoms(), q.head_set())) out.push_back(q.restrict(c, q.head_set()));
    return out;
}

std::vector<VarSet> top_sets(const Query& q) { return top_sets(q.atom_vars(), q.all_atoms(), q.head_set()); }

std::optional<VarSet> separator_vars(const Query& q, const Database& db) {
    VarSet sep = q.evars();
    bool any_prob = false;
    for (const auto& a : q.atoms) {
        if (db.relation(a.relation).deterministic) continue;
        any_prob = true;
        sep &= a.vars;
    }
    if (!any_prob) return std::nullopt;
    return sep;
}

std::string render_incidence_matrix(const Query& q, const std::vector<VarSet>& added,
                                    const std::vector<VarSet>& starred) {
    const VarSet all = q.vars();
    const auto cols = all.elements();
    std::size_t name_w = 0;
    for (const auto& a : q.atoms) name_w = std::max(name_w, a.relation.size());
    std::vector<std::size_t> col_w;
    for (int v : cols) col_w.push_back(std::max<std::size_t>(1, q.var_names[v].size()));

    std::ostringstream out;
    out << std::string(name_w, ' ');
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& n = q.var_names[cols[c]];
        out << "  " << n << std::string(col_w[c] - n.size(), ' ');
    }
    out << '\n';
    for (int i = 0; i < q.atom_count(); ++i) {
        const auto& a = q.atoms[i];
        out << a.relation << std::string(name_w - a.relation.size(), ' ');
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const int v = cols[c];
            const char* mark = " ";
            if (a.vars.contains(v)) mark = "∘";
            else if (i < static_cast<int>(starred.size()) && starred[i].contains(v)) mark = "⋆";
            else if (i < static_cast<int>(added.size()) && added[i].contains(v)) mark = "•";
            out << "  " << mark << std::string(col_w[c] - 1, ' ');
        }
        out << '\n';
    }
    std::string s = out.str();
    std::string trimmed;
    std::istringstream lines(s);
    for (std::string line; std::getline(lines, line);) {
        while (!line.empty() && line.back() == ' ') line.pop_back();
        trimmed += line + "\n";
    }
    return trimmed;
}

} // namespace propdb
