import numpy as np
import pytest

from starsim.model import StarCoefficients
from starsim.validation import (
    CheckResult,
    ValidationReport,
    conservation_residual,
    validate,
)


class TestConservationCheck:
    def test_clean_sets_pass(self):
        rng = np.random.default_rng(1)
        sets = [
            StarCoefficients(rng.uniform(0, 1, 8), rng.uniform(0, 6, 8), rng.uniform(0, 6, 8))
            for _ in range(10)
        ]
        assert conservation_residual(sets) < 1e-12

    def test_injected_fault_detected(self):
        # negative control: storing an independent reflected fraction must
        # trip the conservation check
        rng = np.random.default_rng(2)
        sets = [
            StarCoefficients(rng.uniform(0, 1, 8), rng.uniform(0, 6, 8), rng.uniform(0, 6, 8))
            for _ in range(3)
        ]
        broken = [1.0 - s.beta_t + 1e-6 for s in sets]
        assert conservation_residual(sets, beta_r_override=broken) > 1e-12


class TestReport:
    def test_table_rendering(self):
        report = ValidationReport((
            CheckResult("alpha", True, "fine"),
            CheckResult("beta", False, "broken"),
        ))
        assert not report.ok
        table = report.table()
        assert "PASS" in table and "FAIL" in table


class TestValidateSuite:
    def test_full_suite_passes(self):
        report = validate(oracle_channels=20)
        assert report.ok, "\n" + report.table()
