"""Verification harness plumbing."""

import numpy as np
import pytest

from cdflags.errors import ParameterError
from cdflags.harness import SUITES, CheckResult, exit_code, format_report, random_flag, random_spec, run_suite
from cdflags.jets import validate_mu


def test_jets_suite_passes():
    results = run_suite("jets", seed=7)
    assert results and all(r.status == "PASS" for r in results)
    assert all(r.check.startswith("jets:") for r in results)


def test_invariants_suite_passes():
    results = run_suite("invariants", seed=7)
    assert all(r.status == "PASS" for r in results)


def test_suite_is_deterministic():
    a = format_report(run_suite("jets", seed=3))
    b = format_report(run_suite("jets", seed=3))
    assert a == b


def test_unknown_suite():
    with pytest.raises(ParameterError):
        run_suite("nope")


def test_report_and_exit_codes():
    ok = CheckResult("x: a", "PASS", 0.0, "i")
    bad = CheckResult("x: b", "FAIL", 1.0, "i")
    unsure = CheckResult("x: c", "INCONCLUSIVE", 0.5, "i")
    assert exit_code([ok]) == 0
    assert exit_code([ok, unsure]) == 2
    assert exit_code([ok, unsure, bad]) == 1
    text = format_report([ok, bad], header="hdr")
    lines = text.splitlines()
    assert lines[0] == "hdr" and lines[1].startswith("PASS") and lines[2].startswith("FAIL")
    assert "1 pass, 1 fail, 0 inconclusive" in lines[-1]


def test_random_constructions(rng):
    T = random_flag(rng, 3, 8, extra=True)
    assert T.n == 3 and not T.strict_bidiagonal
    spec = random_spec(rng, 4)
    assert spec.k == 4 and validate_mu(spec.rows).valid


def test_suite_names():
    assert SUITES == ("rigidity", "commutant", "invariants", "jets")
