# tests/test_verification.py
import asyncio
from concurrent.futures import ThreadPoolExecutor

import pytest

from src.verification import (
    MAX_REPORTED_FAILURES,
    VerificationOutcome,
    VerificationPlan,
    check_lemmas,
    run_verification,
)


class TestOutcome:
    def test_empty_outcome_does_not_pass(self):
        assert not VerificationOutcome("empty").passed

    def test_failures_keep_first_examples(self):
        outcome = VerificationOutcome("demo")
        for i in range(MAX_REPORTED_FAILURES + 5):
            outcome.record(False, index=i)
        outcome.record(True)
        assert outcome.checked == MAX_REPORTED_FAILURES + 6
        assert outcome.failures == MAX_REPORTED_FAILURES + 5
        assert [e["index"] for e in outcome.detail["examples"]] == list(range(MAX_REPORTED_FAILURES))
        assert outcome.to_dict()["passed"] is False

    def test_record_many(self):
        outcome = VerificationOutcome("bulk")
        outcome.record_many(100, 0, alpha=0.75)
        assert outcome.passed
        outcome.record_many(50, 2, alpha=1.0)
        assert outcome.checked == 150
        assert outcome.detail["examples"] == [{"alpha": 1.0, "failures": 2}]


class TestPlan:
    def test_requirements(self):
        full = VerificationPlan.full()
        assert full.zero_height == 2000.0
        assert full.sieve_limit == 536
        assert VerificationPlan.quick().zero_height == 200.0


def test_lemma_group_passes():
    outcome = VerificationOutcome("lemmas")
    check_lemmas(VerificationPlan.quick(), outcome)
    assert outcome.passed
    assert outcome.checked > 1000


def test_quick_plan_passes(zeros, table, spec):
    with ThreadPoolExecutor(max_workers=4) as executor:
        outcomes = asyncio.run(run_verification(VerificationPlan.quick(), zeros, table, spec, executor))
    names = [o.name for o in outcomes]
    assert names[0] == "sandwich" and names[-1] == "backend"
    failed = {o.name: o.detail for o in outcomes if not o.passed}
    assert not failed


@pytest.mark.slow
def test_full_plan_passes(zeros, table, spec):
    with ThreadPoolExecutor(max_workers=4) as executor:
        outcomes = asyncio.run(run_verification(VerificationPlan.full(), zeros, table, spec, executor))
    assert all(o.passed for o in outcomes), [o.to_dict() for o in outcomes if not o.passed]
