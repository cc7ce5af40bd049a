import math

import numpy as np
import pytest

from oracles import max_entropy_oracle, max_tradeoff_oracle, random_channel
from remcode.channel import Channel, OutputDistribution, bsc, gv_distance_bsc, output_marginal_uniform
from remcode.gibbs import (
    BETA_MAX,
    InfeasibleEnergyError,
    InfeasibleRateError,
    UnreachableOutputError,
    beta_at_rate,
    bsc_flip_probability,
    entropy_energy_max,
    gibbs_state,
    max_entropy_at_energy,
    min_typical_energy,
)

LOG2 = math.log(2.0)


class TestGibbsState:
    def test_beta_one_is_posterior_shape(self):
        rng = np.random.default_rng(0)
        ch = random_channel(rng, 3, 4)
        g = gibbs_state(ch, None, 1.0)
        expected = ch.p / ch.p.sum(axis=0, keepdims=True)
        assert np.allclose(g.conditional.q_xy, expected, atol=1e-12)

    def test_beta_zero_uniform_on_support(self):
        ch = Channel(np.array([[0.5, 0.5, 0.0], [0.2, 0.3, 0.5], [0.1, 0.2, 0.7]]))
        g = gibbs_state(ch, None, 0.0)
        assert np.allclose(g.conditional.q_xy[:, 0], [1 / 3, 1 / 3, 1 / 3])
        assert np.allclose(g.conditional.q_xy[:, 2], [0.0, 0.5, 0.5])

    def test_bsc_flip_probability_and_entropy(self):
        g = gibbs_state(bsc(0.1), None, 1.0)
        assert g.conditional.q_xy[1, 0] == pytest.approx(0.1, abs=1e-12)
        assert g.cond_entropy == pytest.approx(0.3250829733914482, abs=1e-12)
        assert g.rate == pytest.approx(LOG2 - 0.3250829733914482, abs=1e-12)

    def test_bsc_beta_zero_averages(self):
        g = gibbs_state(bsc(0.1), None, 0.0)
        assert g.cond_entropy == pytest.approx(LOG2, abs=1e-12)
        expected = 0.5 * (-math.log(0.1) - math.log(0.9))
        assert g.mean_energy == pytest.approx(expected, abs=1e-12)

    def test_columns_normalized(self):
        rng = np.random.default_rng(7)
        ch = random_channel(rng, 4, 3)
        for beta in (0.0, 0.7, 3.0, 100.0):
            g = gibbs_state(ch, None, beta)
            assert np.allclose(g.conditional.q_xy.sum(axis=0), 1.0, atol=1e-12)

    def test_unreachable_output_symbol(self):
        ch = Channel(np.array([[1.0, 0.0], [1.0, 0.0]]))
        with pytest.raises(UnreachableOutputError, match="y=1"):
            gibbs_state(ch, OutputDistribution(np.array([0.5, 0.5])), 1.0)
        # zero mass on the dead column is fine
        g = gibbs_state(ch, OutputDistribution(np.array([1.0, 0.0])), 1.0)
        assert g.cond_entropy == pytest.approx(LOG2, abs=1e-12)

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError):
            gibbs_state(bsc(0.1), None, -0.5)


class TestMonotonicity:
    def test_entropy_and_energy_nonincreasing_in_beta(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            ch = random_channel(rng)
            betas = np.linspace(0.0, 8.0, 25)
            states = [gibbs_state(ch, None, b) for b in betas]
            hs = [g.cond_entropy for g in states]
            ds = [g.mean_energy for g in states]
            assert all(a >= b - 1e-10 for a, b in zip(hs, hs[1:]))
            assert all(a >= b - 1e-10 for a, b in zip(ds, ds[1:]))


class TestBetaAtRate:
    def test_definitional_fixed_point(self):
        rng = np.random.default_rng(4)
        ch = random_channel(rng, 3, 3)
        g = gibbs_state(ch, None, 1.0)
        root = beta_at_rate(ch, None, g.rate)
        assert not root.saturated
        assert root.beta == pytest.approx(1.0, abs=1e-8)

    def test_bsc_closed_form(self):
        root = beta_at_rate(bsc(0.1), None, 0.2)
        assert root.beta == pytest.approx(0.645789307512069, abs=1e-6)
        # at the solution the flip probability matches the GV distance
        assert bsc_flip_probability(0.1, root.beta) == pytest.approx(
            gv_distance_bsc(0.2), abs=1e-9
        )

    def test_saturation_for_flat_conditionals(self):
        # constant rows: the Gibbs family never leaves the uniform conditional
        ch = Channel(np.array([[0.5, 0.5], [0.5, 0.5]]))
        root = beta_at_rate(ch, None, 0.3)
        assert root.saturated and root.beta == BETA_MAX

    def test_saturation_near_max_rate(self):
        root = beta_at_rate(bsc(0.1), None, LOG2 - 1e-14)
        assert root.saturated

    def test_infeasible_rate_with_zero_structure(self):
        # support sizes are 1 for y=0 and 2 for y=1: max conditional entropy < ln 3
        ch = Channel(np.array([[1.0, 0.0], [0.7, 0.3], [0.0, 1.0]]))
        with pytest.raises(InfeasibleRateError, match="attainable"):
            beta_at_rate(ch, None, 0.05)


class TestMinTypicalEnergy:
    def test_bsc_energy_units_match_gv(self):
        p = 0.1
        for rate in (0.1, 0.3, 0.5):
            e = min_typical_energy(bsc(p), None, rate)
            d = gv_distance_bsc(rate)
            assert e == pytest.approx(
                d * math.log(1 / p) + (1 - d) * math.log(1 / (1 - p)), abs=1e-8
            )
            # Hamming-normalized version recovers the GV distance
            recovered = (e + math.log(1 - p)) / math.log((1 - p) / p)
            assert recovered == pytest.approx(d, abs=1e-8)

    def test_constant_rows_give_constant_energy(self):
        ch = Channel(np.full((2, 3), 1.0 / 3.0))
        for rate in (0.1, 0.4, 0.6):
            assert min_typical_energy(ch, None, rate) == pytest.approx(math.log(3), abs=1e-12)

    def test_rate_matching_beta_one(self):
        rng = np.random.default_rng(9)
        ch = random_channel(rng, 3, 3)
        g = gibbs_state(ch, None, 1.0)
        assert min_typical_energy(ch, None, g.rate) == pytest.approx(g.mean_energy, abs=1e-7)


class TestMaxEntropyAtEnergy:
    def test_uniform_energy_gives_full_entropy(self):
        rng = np.random.default_rng(2)
        ch = random_channel(rng, 3, 3)
        g0 = gibbs_state(ch, None, 0.0)
        assert max_entropy_at_energy(ch, None, g0.mean_energy) == pytest.approx(
            math.log(3), abs=1e-6
        )

    @pytest.mark.parametrize("flip_fraction", [0.05, 0.2, 0.5, 0.7, 0.9])
    def test_bsc_hamming_parametrization(self, flip_fraction):
        # mean energy of a flip fraction f maps to conditional entropy h(f);
        # fractions above 1/2 exercise the negative-temperature branch
        p = 0.1
        e = flip_fraction * math.log(1 / p) + (1 - flip_fraction) * math.log(1 / (1 - p))
        h = max_entropy_at_energy(bsc(p), None, e)
        expected = -(flip_fraction * math.log(flip_fraction) + (1 - flip_fraction) * math.log(1 - flip_fraction)) if 0 < flip_fraction < 1 else 0.0
        assert h == pytest.approx(expected, abs=1e-6)

    def test_minimal_energy_is_argmin_support_entropy(self):
        # y=0 has two tied minimizers (entropy ln 2), y=1 a unique one (entropy 0)
        ch = Channel(np.array([[0.4, 0.6], [0.4, 0.6], [0.2, 0.8]]))
        q = OutputDistribution(np.array([0.5, 0.5]))
        e_min = 0.5 * (-math.log(0.4)) + 0.5 * (-math.log(0.8))
        assert max_entropy_at_energy(ch, q, e_min) == pytest.approx(0.5 * LOG2, abs=1e-4)

    def test_oracle_agreement_midrange(self):
        rng = np.random.default_rng(21)
        ch = random_channel(rng, 3, 3)
        q = output_marginal_uniform(ch)
        g = gibbs_state(ch, None, 0.8)
        h = max_entropy_at_energy(ch, None, g.mean_energy)
        assert h == pytest.approx(g.cond_entropy, abs=1e-8)
        assert h == pytest.approx(max_entropy_oracle(ch, q.q, g.mean_energy), abs=1e-6)

    def test_outside_interval_rejected(self):
        with pytest.raises(InfeasibleEnergyError, match="achievable interval"):
            max_entropy_at_energy(bsc(0.1), None, 0.01)
        with pytest.raises(InfeasibleEnergyError):
            max_entropy_at_energy(bsc(0.1), None, 10.0)


class TestEntropyEnergyMax:
    def test_vacuous_constraint_branch(self):
        rng = np.random.default_rng(5)
        ch = random_channel(rng, 3, 4)
        for beta in (0.0, 0.5, 2.0):
            g = gibbs_state(ch, None, beta)
            expected = g.cond_entropy - beta * g.mean_energy
            assert entropy_energy_max(ch, None, beta, math.log(3)) == pytest.approx(
                expected, abs=1e-10
            )

    def test_beta_zero_full_rate(self):
        rng = np.random.default_rng(6)
        ch = random_channel(rng, 4, 2)
        assert entropy_energy_max(ch, None, 0.0, math.log(4)) == pytest.approx(
            math.log(4), abs=1e-10
        )

    def test_bsc_binding_branch_value(self):
        # beta above the critical value: ln2 - R - beta * (GV energy)
        p, rate, beta = 0.1, 0.2, 2.0
        d = gv_distance_bsc(rate)
        e_gv = d * math.log(1 / p) + (1 - d) * math.log(1 / (1 - p))
        expected = LOG2 - rate - beta * e_gv
        assert entropy_energy_max(bsc(p), None, beta, rate) == pytest.approx(expected, abs=1e-7)

    def test_branch_consistency_at_gibbs_rate(self):
        rng = np.random.default_rng(13)
        for _ in range(4):
            ch = random_channel(rng)
            beta = float(rng.uniform(0.3, 3.0))
            g = gibbs_state(ch, None, beta)
            unconstrained = g.cond_entropy - beta * g.mean_energy
            binding = ch.log_input_size - g.rate - beta * min_typical_energy(ch, None, g.rate)
            assert abs(unconstrained - binding) < 1e-9
            assert entropy_energy_max(ch, None, beta, g.rate) == pytest.approx(
                unconstrained, abs=1e-9
            )

    @pytest.mark.parametrize("seed", [31, 32, 33])
    def test_slsqp_oracle_agreement(self, seed):
        rng = np.random.default_rng(seed)
        ch = random_channel(rng)
        q = OutputDistribution(rng.dirichlet(np.ones(ch.output_size)))
        beta = float(rng.uniform(0.2, 2.5))
        rate = float(rng.uniform(0.15, 0.85) * ch.log_input_size)
        ours = entropy_energy_max(ch, q, beta, rate)
        oracle = max_tradeoff_oracle(ch, q.q, beta, rate, seed=seed)
        assert ours == pytest.approx(oracle, abs=1e-6)

    def test_concavity_in_rate(self):
        rng = np.random.default_rng(17)
        ch = random_channel(rng, 3, 3)
        beta = 1.3
        rates = np.linspace(0.05, 0.95 * math.log(3), 11)
        js = [entropy_energy_max(ch, None, beta, r) for r in rates]
        for i in range(len(js) - 2):
            assert js[i + 1] >= 0.5 * (js[i] + js[i + 2]) - 1e-9

    def test_infeasible_constraint(self):
        ch = Channel(np.array([[1.0, 0.0], [0.7, 0.3], [0.0, 1.0]]))
        with pytest.raises(InfeasibleRateError):
            entropy_energy_max(ch, None, 1.0, 0.01)
