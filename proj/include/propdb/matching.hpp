#pragma once

#include "propdb/model.hpp"
#include "propdb/query.hpp"

#include <functional>
#include <vector>

namespace propdb {

/// Rows of the atom's relation that pass its constants, repeated-variable
/// equalities and predicates.
std::vector<const TupleRow*> matching_rows(const Query& q, int atom, const Database& db);

/// Calls `f(rows, binding)` once per answer of the full natural join of the
/// query body: rows[i] is the tuple used for atom i, binding[v] the value of
/// variable v.
void for_each_match(const Query& q, const Database& db,
                    const std::function<void(const std::vector<const TupleRow*>&, const std::vector<Constant>&)>& f);

} // namespace propdb
