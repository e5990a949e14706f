"""Inversion tests: weights, known transform pairs, linearity, node placement."""

from __future__ import annotations

import math

import pytest

from hejdstep import (
    DownOutStepSpec,
    OrderError,
    SingularSystemError,
    gs_invert,
    gs_weights,
    price_summary,
    price_time_domain,
)


class TestWeights:
    def test_order_one_by_hand(self):
        # k=1: (+1)/1 * [1 * C(1,1) C(2,1) C(1,0)] = 2
        # k=2: (-1)/2 * [1 * C(1,1) C(2,1) C(1,1)] = -1
        cfg = gs_weights(1)
        assert cfg.weights == (2.0, -1.0)

    @pytest.mark.parametrize("order", range(1, 11))
    def test_weights_sum_to_one(self, order):
        cfg = gs_weights(order)
        assert abs(cfg.weight_sum() - 1.0) <= 1e-9
        assert len(cfg.weights) == 2 * order

    def test_float_sum_adequate_at_default_order(self):
        # rounded weights are good enough at the default order; the exact
        # layer exists for the high orders where they are not
        cfg = gs_weights(7)
        assert abs(math.fsum(cfg.weights) - 1.0) <= 1e-9

    def test_order_validation(self):
        with pytest.raises(OrderError):
            gs_weights(0)
        with pytest.raises(OrderError):
            gs_weights(11)
        with pytest.raises(OrderError):
            gs_weights(2.5)  # type: ignore[arg-type]

    def test_weights_cached(self):
        assert gs_weights(7) is gs_weights(7)


class TestInvert:
    def test_constant_reproduced(self):
        cfg = gs_weights(7)
        for t in (0.1, 1.0, 10.0):
            assert gs_invert(lambda _th: 4.25, t, cfg) == pytest.approx(4.25, abs=1e-8)

    def test_exponential_pair_at_unit_rate(self):
        # transform of e^{-t} is theta/(theta+1); the default order carries
        # roughly six digits at t=1
        cfg = gs_weights(7)
        got = gs_invert(lambda th: th / (th + 1.0), 1.0, cfg)
        assert got == pytest.approx(math.exp(-1.0), abs=1e-6)

    def test_exponential_pair_grid(self):
        # intrinsic truncation error grows with a*t; 6e-5 covers the grid
        cfg = gs_weights(7)
        for a in (0.5, 1.0, 5.0):
            for t in (0.1, 1.0, 5.0):
                got = gs_invert(lambda th: th / (th + a), t, cfg)
                assert got == pytest.approx(math.exp(-a * t), abs=6e-5)

    def test_nodes_are_k_log2_over_t(self):
        seen = []
        cfg = gs_weights(4)
        gs_invert(lambda th: seen.append(th) or 1.0, 2.5, cfg)
        want = [k * math.log(2.0) / 2.5 for k in range(1, 9)]
        assert seen == pytest.approx(want, rel=1e-15)

    def test_t_must_be_positive(self):
        with pytest.raises(ValueError):
            gs_invert(lambda th: 1.0, 0.0)

    def test_error_annotation_preserves_type(self):
        def bad(theta):
            raise SingularSystemError("synthetic failure")

        with pytest.raises(SingularSystemError) as info:
            gs_invert(bad, 1.0, gs_weights(3))
        assert "theta=" in str(info.value)


class TestTimeDomain:
    def test_ladder_anchor(self, kou_model, step_spec):
        got = price_time_domain(kou_model, step_spec, 1.0, 100.0, "euro")
        assert got == pytest.approx(4.596, rel=5e-3)

    def test_zero_spot(self, kou_model, step_spec):
        assert price_time_domain(kou_model, step_spec, 1.0, 0.0, "euro") == 0.0

    def test_unknown_quantity(self, kou_model, step_spec):
        with pytest.raises(ValueError, match="quantity"):
            price_time_domain(kou_model, step_spec, 1.0, 100.0, "gamma")

    def test_inversion_linearity_of_premium_split(self, kou_model, step_spec):
        eep = price_time_domain(kou_model, step_spec, 1.0, 100.0, "eep")
        part_d = price_time_domain(kou_model, step_spec, 1.0, 100.0, "eep_diffusion")
        part_j = price_time_domain(kou_model, step_spec, 1.0, 100.0, "eep_jump")
        assert part_d + part_j == pytest.approx(eep, rel=1e-9)

    def test_stability_in_order(self, kou_model, step_spec):
        prices = [
            price_time_domain(kou_model, step_spec, 1.0, 100.0, "euro", gs_weights(n))
            for n in (6, 7, 8)
        ]
        spread = (max(prices) - min(prices)) / min(prices)
        assert spread < 1e-3

    def test_seasoning_scales_everything(self, kou_model):
        fresh = DownOutStepSpec(100.0, 95.0, -26.34, seasoning=0.0)
        aged = DownOutStepSpec(100.0, 95.0, -26.34, seasoning=0.05)
        factor = math.exp(-26.34 * 0.05)
        for q in ("euro", "amer", "eep"):
            v0 = price_time_domain(kou_model, fresh, 1.0, 100.0, q)
            v1 = price_time_domain(kou_model, aged, 1.0, 100.0, q)
            assert v1 == pytest.approx(factor * v0, rel=1e-12)

    def test_summary_consistency(self, kou_model, step_spec):
        s = price_summary(kou_model, step_spec, 1.0, 100.0)
        assert s["amer"] == pytest.approx(s["euro"] + s["eep"], rel=1e-9)
        assert s["eep_pct"] == pytest.approx(100.0 * s["eep"] / s["amer"], rel=1e-12)
        assert s["dc_pct"] == pytest.approx(100.0 * s["eep_diffusion"] / s["eep"], rel=1e-12)
