import numpy as np
import pytest

from pharma_bertrand import closed_form_prices, envelope_demand, monte_carlo_demand, nash_deviation_check
from pharma_bertrand.errors import BracketMiss
from pharma_bertrand.market_model import demand, indifference_points
from pharma_bertrand.oracle import best_response, compare_with_analytic, own_profit

from conftest import draw_params


def brute_force_demand(params, prices, channels="uoe", n=2_000_000):
    """Choice shares on a midpoint grid of valuations, via np.argmax over (e, o, u)."""
    v = (np.arange(n) + 0.5) / n
    p1, p2, p3 = prices
    u = {
        "u": params.alpha * v - params.m * p1 - params.tx,
        "o": v - params.m * p2 - params.mu1,
        "e": params.theta * v - params.m * p3 - params.mu2,
    }
    order = [c for c in "eou" if c in channels]
    stack = np.stack([u[c] for c in order])
    pick = np.argmax(stack, axis=0)
    buy = stack.max(axis=0) > 0
    shares = {c: np.mean(buy & (pick == k)) for k, c in enumerate(order)}
    return tuple(shares.get(c, 0.0) for c in "uoe")


@pytest.fixture
def eq_prices(feasible):
    return closed_form_prices(feasible)


class TestMonteCarlo:
    def test_empty_demand_at_high_prices(self, feasible):
        est = monte_carlo_demand(feasible, (5.0, 5.0, 5.0), n=10_000, seed=1)
        assert est.d_hat == (0.0, 0.0, 0.0)
        assert est.std_err == (0.0, 0.0, 0.0)

    def test_seeded_determinism(self, feasible, eq_prices):
        a = monte_carlo_demand(feasible, eq_prices, n=200_000, seed=42)
        b = monte_carlo_demand(feasible, eq_prices, n=200_000, seed=42)
        c = monte_carlo_demand(feasible, eq_prices, n=200_000, seed=43)
        assert a == b
        assert a.d_hat != c.d_hat

    def test_partitioning_does_not_change_result(self, feasible, eq_prices):
        one = monte_carlo_demand(feasible, eq_prices, n=500_001, seed=9, workers=1)
        many = monte_carlo_demand(feasible, eq_prices, n=500_001, seed=9, workers=4)
        assert one == many

    def test_backends_agree_bit_for_bit(self, feasible, eq_prices):
        a = monte_carlo_demand(feasible, eq_prices, n=300_000, seed=5, backend="numpy")
        b = monte_carlo_demand(feasible, eq_prices, n=300_000, seed=5, backend="numba")
        assert a.d_hat == b.d_hat

    def test_standard_error_formula(self, feasible, eq_prices):
        est = monte_carlo_demand(feasible, eq_prices, n=100_000, seed=3)
        for d, se in zip(est.d_hat, est.std_err):
            assert 0.0 <= d <= 1.0
            assert se == pytest.approx(np.sqrt(d * (1 - d) / est.n), rel=1e-15)

    def test_matches_exact_envelope(self, feasible, eq_prices):
        exact = envelope_demand(feasible, eq_prices)
        est = monte_carlo_demand(feasible, eq_prices, n=1_000_000, seed=11)
        for d, se, e in zip(est.d_hat, est.std_err, exact):
            assert abs(d - e) <= 3 * max(se, 1e-12)

    def test_matches_envelope_on_random_small_scenarios(self, rng):
        for p in draw_params(rng, 10):
            # rescale money terms so thresholds land inside [0, 1]
            p = p.replace(t=p.t / 400, mu1=p.mu1 / 800, mu2=p.mu2 / 800,
                          c1=p.c1 / 1000, c2=p.c2 / 1000, c3=p.c3 / 1000)
            prices = tuple(rng.uniform(0.0, 0.4, 3))
            exact = envelope_demand(p, prices)
            est = monte_carlo_demand(p, prices, n=400_000, seed=int(rng.integers(2**32)))
            for d, se, e in zip(est.d_hat, est.std_err, exact):
                assert abs(d - e) <= 4 * se + 1e-12

    def test_error_shrinks_like_inverse_sqrt_n(self, feasible, eq_prices):
        exact = np.array(envelope_demand(feasible, eq_prices))
        live = (exact > 0) & (exact < 1)
        exact = exact[live]
        sizes = [10**4, 10**5, 10**6, 10**7]
        errors = []
        for n in sizes:
            z = []
            for seed in range(16):
                est = monte_carlo_demand(feasible, eq_prices, n=n, seed=1000 + seed)
                z.extend((np.array(est.d_hat)[live] - exact) / np.sqrt(exact * (1 - exact)))
            errors.append(np.sqrt(np.mean(np.square(z))))
        slope = np.polyfit(np.log(sizes), np.log(errors), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)


class TestEnvelope:
    def test_matches_brute_force_grid(self, feasible, eq_prices, rng):
        cases = [(feasible, eq_prices)]
        for _ in range(5):
            cases.append((feasible, tuple(rng.uniform(0.0, 0.5, 3))))
        for params, prices in cases:
            for chans in ("uoe", "oe", "uo", "ue"):
                exact = envelope_demand(params, prices, chans)
                grid = brute_force_demand(params, prices, chans)
                assert exact == pytest.approx(grid, abs=2e-6)

    def test_organized_online_formulas_follow_choice_rule(self, feasible):
        prices = (0.2, 0.3, 0.1)
        out = demand(feasible, prices, "oe")
        assert out.regime.case_label == "oe:1"
        assert envelope_demand(feasible, prices, "oe") == pytest.approx(out.split, abs=1e-12)

    def test_unorganized_online_formulas_follow_choice_rule(self, feasible):
        prices = (0.15, 0.3, 0.1)
        out = demand(feasible, prices, "ue")
        assert out.regime.case_label == "ue:1"
        assert envelope_demand(feasible, prices, "ue") == pytest.approx(out.split, abs=1e-12)

    def test_three_channel_formulas_diverge_from_choice_rule(self, feasible, eq_prices):
        # with alpha < 1 the top valuations prefer the organized channel,
        # so the all-active formulas overstate unorganized demand
        pts = indifference_points(feasible, eq_prices)
        assert pts.v_uo < pts.v_ue
        exact = envelope_demand(feasible, eq_prices)
        analytic = demand(feasible, eq_prices, interior=True).split
        assert exact.d_u == 0.0 and analytic.d_u > 0.2
        assert exact.d_e == pytest.approx(analytic.d_e, abs=1e-12)

    def test_comparison_skipped_outside_unit_interval(self, base):
        prices = closed_form_prices(base)
        est = monte_carlo_demand(base, prices, n=1000, seed=0)
        cmp = compare_with_analytic(base, prices, est, interior=True)
        assert not cmp.valid and "outside" in cmp.reason


class TestBestResponse:
    def test_equilibrium_is_fixed_point(self, feasible, eq_prices):
        for i, ch in enumerate("uoe"):
            rivals = [p for j, p in enumerate(eq_prices) if j != i]
            br = best_response(feasible, rivals, ch, (0.0, 1.0))
            assert br == pytest.approx(eq_prices[i], abs=1e-6)

    def test_fixed_point_on_random_draws(self, rng):
        for p in draw_params(rng, 20):
            prices = closed_form_prices(p)
            for i, ch in enumerate("uoe"):
                rivals = [q for j, q in enumerate(prices) if j != i]
                br = best_response(p, rivals, ch, (-1e4, 1e4))
                assert br == pytest.approx(prices[i], rel=1e-6, abs=1e-6)

    def test_dominates_grid(self, feasible):
        prices = (0.2, 0.3, 0.1)
        for i, ch in enumerate("uoe"):
            rivals = [p for j, p in enumerate(prices) if j != i]
            br = best_response(feasible, rivals, ch, (0.0, 1.0))
            full = list(prices)
            full[i] = br
            grid = np.linspace(0.0, 1.0, 1001)
            assert own_profit(feasible, full, ch, br) >= own_profit(feasible, full, ch, grid).max()

    def test_zero_finite_difference_slope(self, feasible):
        prices = (0.2, 0.3, 0.1)
        for i, ch in enumerate("uoe"):
            rivals = [p for j, p in enumerate(prices) if j != i]
            br = best_response(feasible, rivals, ch, (0.0, 1.0))
            full = list(prices)
            h = 1e-4
            slope = (own_profit(feasible, full, ch, br + h) - own_profit(feasible, full, ch, br - h)) / (2 * h)
            assert abs(slope) < 1e-6

    def test_bracket_miss(self, feasible, eq_prices):
        with pytest.raises(BracketMiss) as info:
            best_response(feasible, eq_prices[1:], "u", (0.5, 1.0))
        assert info.value.root == pytest.approx(eq_prices[0])

    def test_grid_fallback_without_concavity(self, feasible):
        p = feasible.replace(alpha=0.7)  # own profit of the unorganized channel is convex
        br = best_response(p, (0.3, 0.1), "u", (0.0, 1.0))
        grid = np.linspace(0.0, 1.0, 1001)
        full = (br, 0.3, 0.1)
        assert own_profit(p, full, "u", br) >= own_profit(p, full, "u", grid).max() - 1e-12

    def test_rejects_empty_bracket(self, feasible):
        with pytest.raises(ValueError):
            best_response(feasible, (0.3, 0.1), "u", (0.5, 0.5))


class TestDeviation:
    def test_no_gain_at_equilibrium(self, feasible, eq_prices):
        reports = nash_deviation_check(feasible, eq_prices, rel_range=0.5, steps=1001)
        pis = [own_profit(feasible, eq_prices, ch, p) for ch, p in zip("uoe", eq_prices)]
        for r, pi in zip(reports, pis):
            assert r.profit_gain <= 1e-6 * abs(pi)
            assert r.grid[0] <= r.incumbent_price <= r.grid[1]

    def test_gain_after_perturbation(self, base):
        prices = closed_form_prices(base)
        moved = (prices[0] + 10.0, prices[1], prices[2])
        reports = nash_deviation_check(base, moved, rel_range=0.5, steps=1001)
        assert reports[0].profit_gain > 0
        assert reports[0].best_deviation_price == pytest.approx(prices[0], abs=1e-3)

    def test_gain_scales_with_beta(self, base):
        prices = closed_form_prices(base)
        moved = (prices[0] + 10.0, prices[1] - 5.0, prices[2] + 3.0)
        one = nash_deviation_check(base, moved)
        half = nash_deviation_check(base.replace(beta=0.5), moved)
        for a, b in zip(one, half):
            assert b.profit_gain == pytest.approx(0.5 * a.profit_gain, rel=1e-6)

    def test_needs_three_steps(self, feasible, eq_prices):
        with pytest.raises(ValueError):
            nash_deviation_check(feasible, eq_prices, steps=2)
