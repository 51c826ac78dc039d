import itertools
import random

import pytest

from sathub.cnf import ClauseRangeError, CnfStore, canonical_clause

from oracles import cnf_models


def test_add_variable_counts():
    store = CnfStore()
    assert store.add_variable() == 1
    assert store.add_variable() == 2
    assert store.add_variable() == 3
    assert store.var_count == 3

    store8 = CnfStore(8)
    assert store8.add_variable() == 9


def test_add_variables_bulk():
    store = CnfStore(4)
    assert store.add_variables(8) == 5
    assert store.var_count == 12

    empty = CnfStore()
    assert empty.add_variables(1) == 1
    with pytest.raises(ValueError):
        empty.add_variables(0)


def test_canonical_clause_order():
    assert canonical_clause([3, -2, 1]) == (1, -2, 3)
    # negative precedes positive for the same variable
    assert canonical_clause([2, -2, 1]) == (1, -2, 2)
    # duplicates removed
    assert canonical_clause([1, 1, -3]) == (1, -3)
    # idempotent
    for clause in [[3, -2, 1], [5, 5, -5], [-4]]:
        c1 = canonical_clause(clause)
        assert canonical_clause(c1) == c1


def test_canonical_clause_rejects_bad_literals():
    with pytest.raises(ValueError):
        canonical_clause([])
    with pytest.raises(ValueError):
        canonical_clause([1, 0])
    with pytest.raises(ValueError):
        canonical_clause([True])


def test_add_clause_canonicalizes_and_dedups():
    store = CnfStore(3)
    assert store.add_clause([3, -2, 1]) is True
    assert store.clauses() == [[1, -2, 3]]
    assert store.add_clause([1, -2, 3]) is False
    assert store.add_clause([-2, 3, 1]) is False
    assert store.clauses() == [[1, -2, 3]]


def test_add_clause_out_of_range():
    store = CnfStore(3)
    with pytest.raises(ClauseRangeError):
        store.add_clause([5])
    with pytest.raises(ClauseRangeError):
        store.add_clause([1, -4])


def test_clauses_returns_insertion_order():
    store = CnfStore(5)
    store.add_clause([1, -2, 3])
    store.add_clause([4, -5])
    assert store.clauses() == [[1, -2, 3], [4, -5]]
    assert CnfStore().clauses() == []


def test_tautologies_and_duplicate_literals():
    store = CnfStore(2)
    assert store.add_clause([1, -1]) is True
    assert store.clauses() == [[-1, 1]]
    assert store.add_clause([2, 2, 2]) is True
    assert store.clauses() == [[-1, 1], [2]]


def test_attached_fork_sees_origin_updates():
    store = CnfStore(3)
    fork = store.fork(detach=False)
    store.add_clause([1])
    assert [1] in fork.clauses()
    assert fork.var_count == 3
    store.add_variable()
    assert fork.var_count == 4


def test_detached_fork_is_frozen():
    store = CnfStore(3)
    store.add_clause([1, 2])
    fork = store.fork(detach=True)
    store.add_clause([3])
    store.add_variables(2)
    assert fork.clauses() == [[1, 2]]
    assert fork.var_count == 3


def test_fork_writes_never_reach_origin():
    store = CnfStore(3)
    store.add_clause([1, 2])
    fork = store.fork(detach=False)
    fork.add_clause([-1])
    assert store.clauses() == [[1, 2]]
    assert fork.clauses() == [[1, 2], [-1]]


def test_fork_dedups_against_origin():
    store = CnfStore(3)
    store.add_clause([1, 2])
    fork = store.fork(detach=False)
    assert fork.add_clause([2, 1]) is False
    # origin may later add a clause the fork stored first; the fork then
    # reports it once, at its origin position
    assert fork.add_clause([3]) is True
    assert store.add_clause([3]) is True
    assert fork.clauses().count([3]) == 1


def test_fork_of_fork_chain():
    store = CnfStore(2)
    store.add_clause([1])
    f1 = store.fork(detach=False)
    f1.add_clause([2])
    f2 = f1.fork(detach=False)
    f2.add_clause([-1, -2])
    assert f2.clauses() == [[1], [2], [-1, -2]]
    store.add_clause([-2, 1])
    assert [1, -2] in f2.clauses()
    assert f1.clauses() == [[1], [1, -2], [2]]


def test_detached_fork_own_variables():
    store = CnfStore(2)
    fork = store.fork(detach=True)
    assert fork.add_variable() == 3
    assert store.var_count == 2
    fork.add_clause([3])
    assert fork.clauses() == [[3]]


def test_attached_fork_shares_variables():
    store = CnfStore(2)
    fork = store.fork(detach=False)
    assert fork.add_variable() == 3
    assert store.var_count == 3


def test_evaluate_basic():
    store = CnfStore(2)
    store.add_clause([1, 2])
    assert store.evaluate([False, True]) is True
    assert store.evaluate([False, False]) is False

    contradiction = CnfStore(1)
    contradiction.add_clause([1])
    contradiction.add_clause([-1])
    assert contradiction.evaluate([True]) is False
    assert contradiction.evaluate([False]) is False

    empty = CnfStore(2)
    assert empty.evaluate([True, False]) is True

    with pytest.raises(ValueError):
        store.evaluate([True])


def test_evaluate_matches_truth_table_exhaustively():
    rng = random.Random(7)
    for trial in range(60):
        n = rng.randint(1, 4)
        store = CnfStore(n)
        clauses = []
        for _ in range(rng.randint(0, 8)):
            width = rng.randint(1, n)
            variables = rng.sample(range(1, n + 1), width)
            clause = [v if rng.random() < 0.5 else -v for v in variables]
            store.add_clause(clause)
            clauses.append(clause)
        models = set(cnf_models(clauses, n))
        for bits in itertools.product([False, True], repeat=n):
            assert store.evaluate(list(bits)) == (bits in models)


def test_fork_isolation_random_interleavings():
    rng = random.Random(42)
    for trial in range(40):
        n = rng.randint(2, 5)
        plain = CnfStore(n)
        layered = CnfStore(n)
        forks = [layered.fork(detach=rng.random() < 0.5) for _ in range(3)]
        for _ in range(30):
            clause = [
                v if rng.random() < 0.5 else -v
                for v in rng.sample(range(1, n + 1), rng.randint(1, n))
            ]
            target = rng.randrange(4)
            if target == 0:
                plain.add_clause(clause)
                layered.add_clause(clause)
            else:
                forks[target - 1].add_clause(clause)
        assert layered.clauses() == plain.clauses()


def test_dedup_soundness_across_views():
    rng = random.Random(9)
    store = CnfStore(4)
    fork = store.fork(detach=False)
    for _ in range(200):
        clause = [
            v if rng.random() < 0.5 else -v
            for v in rng.sample(range(1, 5), rng.randint(1, 4))
        ]
        (store if rng.random() < 0.5 else fork).add_clause(clause)
    for view in (store, fork):
        seen = view.clause_tuples()
        assert len(seen) == len(set(seen))


def test_attached_fork_superset_of_origin():
    rng = random.Random(3)
    store = CnfStore(4)
    fork = store.fork(detach=False)
    for _ in range(100):
        clause = [
            v if rng.random() < 0.5 else -v
            for v in rng.sample(range(1, 5), rng.randint(1, 3))
        ]
        (store if rng.random() < 0.6 else fork).add_clause(clause)
        assert set(store.clause_tuples()) <= set(fork.clause_tuples())


def test_version_counter_bumps_on_clause_adds():
    store = CnfStore(2)
    v0 = store.version
    store.add_clause([1])
    assert store.version > v0
    fork = store.fork(detach=False)
    v1 = fork.version
    fork.add_clause([2])
    assert fork.version > v1
