#include "propdb/plan.hpp"

#include <algorithm>
#include <unordered_set>

namespace propdb {

namespace {

std::vector<std::string> relation_names(const Query& q, AtomSet atoms) {
    std::vector<std::string> names;
    atoms.for_each([&](int i) { names.push_back(q.atoms[i].relation); });
    std::sort(names.begin(), names.end());
    return names;
}

std::string list_text(const char* op, const std::vector<Plan>& children) {
    std::string out = std::string(op) + "( ";
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) out += ", ";
        out += children[i]->text;
    }
    return out + " )";
}

} // namespace

Plan make_scan(const Query& q, int atom) {
    auto n = std::make_shared<PlanNode>();
    n->kind = PlanKind::Scan;
    n->atom = atom;
    n->head = q.atoms[atom].vars;
    n->atoms = AtomSet::single(atom);
    n->text = q.render_atom(atom);
    return n;
}

Plan make_project(const Query& q, VarSet away, Plan child) {
    away &= child->head;
    if (away.empty()) return child;
    auto n = std::make_shared<PlanNode>();
    n->kind = PlanKind::Project;
    n->away = away;
    n->head = child->head - away;
    n->atoms = child->atoms;
    n->text = "proj[" + q.var_list(away) + "] " + child->text;
    n->children.push_back(std::move(child));
    return n;
}

Plan make_join(const Query& q, std::vector<Plan> children) {
    std::vector<Plan> flat;
    for (auto& c : children) {
        if (c->kind == PlanKind::Join) flat.insert(flat.end(), c->children.begin(), c->children.end());
        else flat.push_back(std::move(c));
    }
    if (flat.size() == 1) return flat.front();
    std::vector<std::pair<std::vector<std::string>, Plan>> keyed;
    for (auto& c : flat) keyed.emplace_back(relation_names(q, c->atoms), std::move(c));
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second->text < b.second->text;
    });
    auto n = std::make_shared<PlanNode>();
    n->kind = PlanKind::Join;
    for (auto& [_, c] : keyed) {
        n->head |= c->head;
        n->atoms |= c->atoms;
        n->children.push_back(std::move(c));
    }
    n->text = list_text("join", n->children);
    return n;
}

Plan make_min(const Query&, std::vector<Plan> children) {
    children = dedupe(children);
    if (children.size() == 1) return children.front();
    auto n = std::make_shared<PlanNode>();
    n->kind = PlanKind::Min;
    n->head = children.front()->head;
    for (const auto& c : children) n->atoms |= c->atoms;
    n->children = std::move(children);
    n->text = list_text("min", n->children);
    return n;
}

std::string view_name(int view) { return "V" + std::to_string(view + 1); }

Plan make_view_ref(const Query& q, int view, VarSet head, AtomSet atoms) {
    auto n = std::make_shared<PlanNode>();
    n->kind = PlanKind::View;
    n->view = view;
    n->head = head;
    n->atoms = atoms;
    n->text = view_name(view) + "(" + q.var_list(head) + ")";
    return n;
}

std::vector<Plan> dedupe(const std::vector<Plan>& plans) {
    std::vector<Plan> out;
    std::unordered_set<std::string> seen;
    for (const auto& p : plans)
        if (seen.insert(p->text).second) out.push_back(p);
    return out;
}

int count_nodes(const Plan& p, PlanKind kind) {
    int n = p->kind == kind ? 1 : 0;
    for (const auto& c : p->children) n += count_nodes(c, kind);
    return n;
}

} // namespace propdb
