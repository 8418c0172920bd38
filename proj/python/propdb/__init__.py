"""Probabilistic database query evaluation with dissociation-based plans."""

try:
    from ._propdb import (
        Database,
        DataError,
        Error,
        OracleInfeasible,
        QueryError,
        UsageError,
        exact,
        is_hierarchical,
        load,
        loads,
        mc,
        parse,
        plans,
        propagation,
        safe_plan,
    )
except ImportError:  # in-tree build: extension next to the build outputs
    from _propdb import (
        Database,
        DataError,
        Error,
        OracleInfeasible,
        QueryError,
        UsageError,
        exact,
        is_hierarchical,
        load,
        loads,
        mc,
        parse,
        plans,
        propagation,
        safe_plan,
    )

__all__ = [
    "Database",
    "DataError",
    "Error",
    "OracleInfeasible",
    "QueryError",
    "UsageError",
    "exact",
    "is_hierarchical",
    "load",
    "loads",
    "mc",
    "parse",
    "plans",
    "propagation",
    "safe_plan",
]
