#include "propdb/metrics.hpp"

#include "propdb/error.hpp"
#include "propdb/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace propdb {

Ranking ranking_from(const AnswerTable& t, std::set<ValueTuple> relevant) {
    Ranking r;
    for (const auto& [k, p] : t.rows) r.items.emplace_back(k, p);
    r.relevant = std::move(relevant);
    return r;
}

double ap_at_k(const Ranking& rk, int k) {
    if (k < 1) throw UsageError("AP@k needs k >= 1");
    if (rk.relevant.empty()) throw UsageError("AP@k needs a nonempty relevant set");
    auto items = rk.items;
    for (const auto& [_, s] : items)
        if (!std::isfinite(s)) throw UsageError("ranking scores must be finite");
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    const double n = std::min<double>(k, static_cast<double>(rk.relevant.size()));
    double sum = 0.0;
    double before = 0.0;
    std::size_t start = 0;
    while (start < items.size() && static_cast<int>(start) < k) {
        std::size_t end = start;
        double rel = 0.0;
        while (end < items.size() && items[end].second == items[start].second) {
            if (rk.relevant.contains(items[end].first)) rel += 1.0;
            ++end;
        }
        const double t = static_cast<double>(end - start);
        const double pair = t > 1.0 ? rel * (rel - 1.0) / (t * (t - 1.0)) : 0.0;
        for (std::size_t i = start; i < end && static_cast<int>(i) < k; ++i) {
            const double j = static_cast<double>(i - start + 1);
            const double expected = rel / t * (before + 1.0) + (j - 1.0) * pair;
            sum += expected / static_cast<double>(i + 1);
        }
        before += rel;
        start = end;
    }
    return sum / n;
}

double map_over(const std::vector<Ranking>& rankings, int k) {
    if (rankings.empty()) throw UsageError("MAP over no rankings");
    double s = 0.0;
    for (const auto& r : rankings) s += ap_at_k(r, k);
    return s / static_cast<double>(rankings.size());
}

std::set<ValueTuple> top_k_answers(const AnswerTable& t, int k) {
    const auto rows = ranked_rows(t);
    std::set<ValueTuple> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(i) >= k && rows[i].second != rows[k - 1].second) break;
        out.insert(rows[i].first);
    }
    return out;
}

Ranking rank_by_lineage_size(const Query& q, const Database& db) {
    Ranking r;
    for (const auto& [key, dnf] : lineage(q, db)) r.items.emplace_back(key, static_cast<double>(dnf.clauses.size()));
    return r;
}

} // namespace propdb
