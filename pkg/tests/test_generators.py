import math

import numpy as np
import pytest

from snowcert.chains import best_alpha
from snowcert.errors import CapTooSmall, ParameterError, ResolutionTooSmall, SizeOverflow
from snowcert.generators import (
    GeneratorSpec,
    euclidean_grid,
    gamma_family_indices,
    gamma_product,
    gamma_schedule,
    generate,
    random_metric,
    snowflaked_interval,
    tyson_wu_block,
    tyson_wu_counts,
)
from snowcert.metric import rescale, snowflake_transform, validate


def _revalidate(m):
    return validate(m.d, tol_rel=1e-9, triangle="exact")


class TestEuclideanGrid:
    def test_m3(self):
        m = euclidean_grid(3)
        assert m.labels == ("0.0", "0.5", "1.0")
        assert m.d[0, 1] == 0.5 and m.d[0, 2] == 1.0

    def test_m2(self):
        assert euclidean_grid(2).d[0, 1] == 1.0

    def test_too_small(self):
        with pytest.raises(ResolutionTooSmall):
            euclidean_grid(1)

    def test_collinear_chain(self):
        assert best_alpha(euclidean_grid(21), 5, 0.0).alpha_star == 0.0


class TestSnowflakedInterval:
    def test_alpha_one(self):
        assert snowflaked_interval(9, 1.0).equals(euclidean_grid(9))

    def test_matches_transform(self):
        a = snowflaked_interval(13, 0.4)
        b = snowflake_transform(euclidean_grid(13), 0.4)
        assert np.array_equal(a.d, b.d)

    def test_k3(self):
        a = best_alpha(snowflaked_interval(21, 0.5), 3, 0.0).alpha_star
        assert a == pytest.approx(math.sqrt(2) - 1, abs=1e-12)

    @pytest.mark.parametrize("alpha_s", [0.0, 1.5])
    def test_bad_alpha(self, alpha_s):
        with pytest.raises(ParameterError):
            snowflaked_interval(5, alpha_s)


class TestTysonWu:
    def test_counts(self):
        assert tyson_wu_counts(1) == (4, 9)
        assert tyson_wu_counts(4) == (16, 33)
        assert tyson_wu_counts(9)[1] == 683

    def test_n1_points(self):
        m = tyson_wu_block(1)
        assert m.n == 9
        assert [float(x) for x in m.labels] == [0.5 * i for i in range(9)]

    def test_n4_axis(self):
        m = tyson_wu_block(4)
        axis = m.meta["axis_indices"]
        assert len(axis) == 33 and not m.meta["axis_truncated"]
        assert m.n == 500
        steps = np.diff([float(m.labels[i].split(",")[0]) for i in axis])
        assert np.all(steps == 2.0**-4)
        for lab in (m.labels[i] for i in axis):
            assert all(float(v) == 0.0 for v in lab.split(",")[1:])

    def test_rn_rescaled_axis_is_geodesic(self):
        m = tyson_wu_block(4)
        r = m.meta["r_n"]
        assert r == 1.0
        big = rescale(m.submatrix(m.meta["axis_indices"]), r)
        assert best_alpha(big, 8, 0.0).alpha_star == 0.0

    def test_rn_value(self):
        m = tyson_wu_block(9, cap=60)
        assert m.meta["r_n"] == 1.5
        assert m.meta["axis_truncated"] and m.n == 60

    def test_reembedding_isometry(self):
        n = 3
        m = tyson_wu_block(n, cap=80, seed=2)
        pts = np.array([[float(v) for v in lab.split(",")] for lab in m.labels])
        # place the block in coordinates n(n-1)/2 + 1 .. n(n-1)/2 + n of a larger space
        off = n * (n - 1) // 2
        emb = np.zeros((m.n, off + n + 4))
        emb[:, off:off + n] = pts
        d = np.linalg.norm(emb[:, None, :] - emb[None, :, :], axis=2)
        assert np.allclose(d, m.d, rtol=1e-13, atol=1e-15)

    def test_valid_and_deterministic(self):
        a = tyson_wu_block(5, cap=120, seed=3)
        _revalidate(a)
        assert a.equals(tyson_wu_block(5, cap=120, seed=3))
        assert not a.equals(tyson_wu_block(5, cap=120, seed=4))

    def test_cap_too_small(self):
        with pytest.raises(CapTooSmall):
            tyson_wu_block(2, cap=2)


class TestGammaProduct:
    def test_schedule(self):
        g = gamma_schedule(4, 0.5)
        assert g == pytest.approx([0.75, 1 - 0.5 / 3, 0.875, 0.9])
        assert all(a < b for a, b in zip(g, g[1:]))

    def test_single_level(self):
        m = gamma_product(1, 9, 0.5)
        assert np.allclose(m.d, snowflaked_interval(9, 0.75).d, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("j", [1, 2, 5])
    def test_restriction(self, j):
        levels, res = 5, 7
        m = gamma_product(levels, res, 0.5)
        sub = m.submatrix(gamma_family_indices(levels, res, j))
        gam = gamma_schedule(levels, 0.5)[j - 1]
        assert np.array_equal(sub.d, snowflaked_interval(res, gam).d)

    def test_cross_distances(self):
        m = gamma_product(2, 3, 0.5)
        g1, g2 = gamma_schedule(2, 0.5)
        # points e1 * 1/2 (index 1) and e2 * 1 (index 4)
        assert m.d[1, 4] == pytest.approx(math.sqrt(0.5 ** (2 * g1) + 1.0))
        _revalidate(m)

    def test_c_zero_is_euclidean(self):
        m = gamma_product(3, 5, 0.0)
        assert best_alpha(m, 3, 0.0).alpha_star == 0.0

    def test_overflow(self):
        with pytest.raises(SizeOverflow):
            gamma_product(10, 100, 0.5, max_points=500)


class TestRandomMetric:
    @pytest.mark.parametrize("seed", range(5))
    def test_uniform_valid(self, seed):
        m = random_metric(15, seed=seed)
        _revalidate(m)
        off = m.d[~np.eye(15, dtype=bool)]
        assert off.min() >= 1.0 and off.max() <= 2.0

    def test_lp_valid(self):
        _revalidate(random_metric(10, seed=7, model="random_points_lp", dim=2, p=2))
        _revalidate(random_metric(10, seed=7, model="random_points_lp", dim=3, p=math.inf))

    def test_deterministic(self):
        assert random_metric(8, seed=3).equals(random_metric(8, seed=3))
        assert not random_metric(8, seed=3).equals(random_metric(8, seed=4))

    def test_unknown_model(self):
        with pytest.raises(ParameterError):
            random_metric(5, model="gaussian")


class TestGenerate:
    @pytest.mark.parametrize("spec", [
        GeneratorSpec("euclidean_grid", {"m": 5}),
        GeneratorSpec("snowflaked_interval", {"m": 5, "alpha_s": 0.5}),
        GeneratorSpec("tyson_wu_block", {"n": 2, "cap": 50}),
        GeneratorSpec("gamma_product", {"levels": 2, "m": 4, "c": 0.5}),
        GeneratorSpec("random_metric", {"n": 6, "seed": 1}),
    ])
    def test_dispatch_and_provenance(self, spec):
        m = generate(spec)
        recorded = m.meta["generator"]
        assert recorded["kind"] == spec.kind
        assert spec.params.items() <= recorded["params"].items()
        assert generate(GeneratorSpec.from_dict(recorded)).equals(m)
        assert GeneratorSpec.from_dict(spec.to_dict()) == spec
        _revalidate(m)

    def test_product_of(self):
        spec = GeneratorSpec("product_of", {"factors": [
            {"kind": "euclidean_grid", "params": {"m": 3}},
            {"kind": "euclidean_grid", "params": {"m": 4}},
        ], "mode": "sup"})
        m = generate(spec)
        assert m.n == 12

    def test_missing_param(self):
        with pytest.raises(ParameterError):
            generate(GeneratorSpec("euclidean_grid", {}))

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            GeneratorSpec("koch_curve")
