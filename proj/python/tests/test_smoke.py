from pathlib import Path

import pytest

import propdb

FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "four_atom"
QUERY = "q() :- R(x), S(x), T(x,y), U(y)"


@pytest.fixture(scope="module")
def db():
    return propdb.load(FIXTURES / "schema.txt", FIXTURES)


def test_load(db):
    assert db.relations == ["R", "S", "T", "U"]
    assert db.tuple_count == 9


def test_plans_and_scores(db):
    assert len(propdb.plans(QUERY)) == 2
    assert propdb.safe_plan(QUERY) is None
    assert propdb.safe_plan("q() :- R(x,y), S(x)") is not None
    assert propdb.exact(QUERY, db) == {(): pytest.approx(83 / 512, abs=1e-12)}
    for opt in ("none", "single", "views", "semijoin", "all"):
        assert propdb.propagation(QUERY, db, opt)[()] == pytest.approx(169 / 1024, abs=1e-12)
    assert propdb.mc(QUERY, db, samples=20000, seed=3)[()] == pytest.approx(83 / 512, abs=0.02)


def test_answers_with_head():
    db = propdb.loads("R(a,b) prob\n", {"R": "a\tb\t_p\n1\tx\t0.5\n1\ty\t0.5\n2\tx\t0.25\n"})
    assert propdb.exact("q(u) :- R(u,v)", db) == {(1,): 0.75, (2,): 0.25}


def test_errors(db):
    with pytest.raises(propdb.QueryError):
        propdb.parse("q( :- R(x)")
    with pytest.raises(propdb.OracleInfeasible):
        propdb.exact(QUERY, db, var_limit=2)
    with pytest.raises(propdb.UsageError):
        propdb.mc(QUERY, db, samples=0)
    with pytest.raises(propdb.Error):
        propdb.loads("R(a) prob\n", {"R": "a\t_p\n1\t3\n"})
