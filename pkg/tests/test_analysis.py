import csv
import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snowcert.analysis import (
    AlphaReport,
    ScanRecord,
    compare_transform,
    scan,
    triple_audit,
)
from snowcert.chains import SearchBudget
from snowcert.errors import NoAdmissibleChain, ParameterError, ReportInvariantError
from snowcert.generators import euclidean_grid, random_metric, snowflaked_interval
from snowcert.metric import rescale, snowflake_transform
from snowcert.oracle import enumerate_best


class TestScan:
    def test_single_cell(self):
        rep = scan(snowflaked_interval(21, 0.5), [3], [0.0])
        (rec,) = rep.grid
        assert rec.alpha_star == pytest.approx(0.41421356237, abs=1e-10)
        assert rec.certified and rec.argmin_chain == (0, 1, 2)

    def test_euclidean_all_zero(self):
        rep = scan(euclidean_grid(21))
        assert len(rep.grid) == 16
        assert all(r.alpha_star == 0.0 for r in rep.grid)

    @pytest.mark.parametrize("seed", range(4))
    def test_monotone_rows(self, seed):
        m = random_metric(10, seed=seed, model="random_points_lp")
        eps = [0.0, 0.1, 0.5]
        rep = scan(m, [3, 4], eps)
        for k in (3, 4):
            row = [math.inf if r.alpha_star is None else r.alpha_star
                   for r in rep.grid if r.k == k]
            oracle = []
            for e in eps:
                try:
                    oracle.append(max(enumerate_best(m.d, k, e)[0] - 1, 0.0))
                except NoAdmissibleChain:
                    oracle.append(math.inf)
            assert row == oracle
            assert all(a >= b for a, b in zip(row, row[1:]))

    def test_errors_recorded(self):
        rep = scan(euclidean_grid(4), [3, 5], [0.0])
        assert rep.grid[0].alpha_star == 0.0
        assert rep.grid[1].error["error"] == "no_admissible_chain"
        assert rep.grid[1].alpha_star is None and not rep.grid[1].certified

    def test_rerun_stable(self):
        m = random_metric(9, seed=5)
        a = scan(m, [3, 4], [0.0, 1.0], threads=1).to_dict(wall_time=False)
        b = scan(m, [3, 4], [0.0, 1.0], threads=4).to_dict(wall_time=False)
        assert a == b

    def test_beam_not_certified(self):
        rep = scan(random_metric(9, seed=2), [3], [0.5], SearchBudget(mode="beam"))
        assert rep.grid[0].mode == "beam" and not rep.grid[0].certified

    def test_space_id_depends_on_matrix(self):
        a = scan(random_metric(6, seed=1), [3], [0.0]).space_id
        b = scan(random_metric(6, seed=2), [3], [0.0]).space_id
        assert a != b and len(a) == 16

    def test_triple_audit_attached(self):
        rep = scan(snowflaked_interval(9, 0.5), [3], [0.0], alpha_probe=0.5)
        assert rep.triple_audit == {"alpha_probe": 0.5, "fraction": 1.0}

    def test_csv(self):
        rep = scan(euclidean_grid(4), [3, 5], [0.0])
        rows = list(csv.DictReader(io.StringIO(rep.to_csv(wall_time=False))))
        assert len(rows) == 2
        assert rows[0]["argmin_chain"] == "0-1-2"
        assert rows[1]["error"] == "no_admissible_chain"
        assert "wall_time" not in rows[0]


class TestReportInvariants:
    def _rec(self, eps, a, certified=True, mode="exact"):
        return ScanRecord(3, eps, a, certified, (0, 1, 2), 1, 0.0, None, mode)

    def test_increase_rejected(self):
        with pytest.raises(ReportInvariantError):
            AlphaReport("x", (self._rec(0.0, 0.1), self._rec(0.5, 0.2)))

    def test_certified_beam_rejected(self):
        with pytest.raises(ReportInvariantError):
            AlphaReport("x", (self._rec(0.0, 0.1, mode="beam"),))

    def test_beam_rows_not_monotone_checked(self):
        AlphaReport("x", (self._rec(0.0, 0.1, False, "beam"), self._rec(0.5, 0.2, False, "beam")))


class TestTripleAudit:
    @pytest.mark.parametrize("a", [0.25, 0.5, 0.75])
    def test_snowflake_full_pass(self, a):
        m = snowflake_transform(random_metric(20, seed=3), a)
        assert triple_audit(m, a) == 1.0

    def test_snowflaked_interval_50(self):
        assert triple_audit(snowflaked_interval(50, 0.6), 0.6) == 1.0

    def test_euclidean_fails_some(self):
        assert triple_audit(euclidean_grid(5), 0.5) < 1.0

    def test_bad_probe(self):
        with pytest.raises(ParameterError):
            triple_audit(euclidean_grid(5), 1.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(-8, 8), st.floats(0.05, 0.95))
    def test_rescale_invariance(self, seed, e, probe):
        m = random_metric(8, seed=seed, model="random_points_lp")
        assert triple_audit(rescale(m, 2.0**e), probe) == triple_audit(m, probe)


class TestCompareTransform:
    def test_grid17(self):
        rows = compare_transform(euclidean_grid(17), [1.0, 0.75, 0.5], 3, 0.0)
        got = [r.alpha_star for r in rows]
        assert got == pytest.approx([0.0, 2**0.25 - 1, math.sqrt(2) - 1], abs=1e-12)
        assert [r.collinear_model for r in rows] == pytest.approx(got, abs=1e-12)
        assert all(a <= b for a, b in zip(got, got[1:]))

    def test_identity_row_equals_scan(self):
        m = random_metric(9, seed=4, model="random_points_lp")
        (row,) = compare_transform(m, [1.0], 4, 0.25)
        rec = scan(m, [4], [0.25]).grid[0]
        assert (row.alpha_star, row.chain) == (rec.alpha_star, rec.argmin_chain)

    def test_error_row(self):
        (row,) = compare_transform(euclidean_grid(3), [0.5], 5, 0.0)
        assert row.alpha_star is None and row.error["error"] == "no_admissible_chain"
