import numpy as np
import pytest

from gammalab.evaluator import QuadConfig
from gammalab.gridfn import from_values
from gammalab.invariants import DEFAULT_CASES, DEFAULT_SEED, JUMP_EVERY, check_function, random_corpus, run_suite


def test_corpus_is_deterministic():
    first = random_corpus(10, seed=11)
    again = random_corpus(10, seed=11)
    assert all(a.same_as(b) for a, b in zip(first, again))
    other = random_corpus(10, seed=12)
    assert not all(a.same_as(b) for a, b in zip(first, other))


def test_corpus_has_small_jumps():
    corpus = random_corpus(2 * JUMP_EVERY, seed=3, delta=0.1)
    jumpy = [u for u in corpus if not u.is_continuous]
    for u in jumpy:
        sizes = np.abs(u.jumps[u.jumps != 0.0])
        assert np.allclose(sizes, 0.03)
    assert all(u.x[0] == 0.0 and u.x[-1] == 1.0 for u in corpus)


def test_check_function_rows(indicator):
    u = from_values([0.0, 0.4, 1.0], [0.0, 0.7, 0.2])
    rows = check_function(1, u, 0.1, indicator, QuadConfig(), np.random.default_rng(0))
    checks = {row["check"] for row in rows}
    assert {"negation", "shift", "reflection", "threads", "definitional_scaling", "block_rescale_n3"} <= checks
    assert all(row["passed"] for row in rows)


def test_small_suite_passes(indicator):
    report = run_suite(indicator, delta=0.1, cases=JUMP_EVERY, seed=5)
    assert report.passed
    assert report.failures == []
    record = report.to_record()
    assert record["cases"] == JUMP_EVERY
    assert record["passed"] is True


@pytest.mark.slow
def test_full_corpus_passes(indicator):
    report = run_suite(indicator, delta=0.1, cases=DEFAULT_CASES, seed=DEFAULT_SEED)
    assert report.failures == []
    assert report.passed
    assert {row["case"] for row in report.rows} == set(range(DEFAULT_CASES))
    # 함수마다 블록 재축척 검사 하나
    blocks = [row for row in report.rows if row["check"].startswith("block_rescale_n")]
    assert len(blocks) == DEFAULT_CASES
