"""Gaussian-route discrimination versus Fock-route and closed forms."""

import math

import numpy as np
import pytest

from catrep.catcode import CatCodeSpec, error_space_state, loss_weights
from catrep.usd import (
    CoherentSuperposition,
    beam_splitter,
    cat_superposition,
    click_probability,
    linear_optics_closed_form,
    linear_optics_output_states,
    linear_optics_usd_probability,
    optimal_usd_probability,
    overlap,
    tensor,
    usd_sweep,
)


def coherent(a, n_modes=1, mode=0):
    amps = [0.0] * n_modes
    amps[mode] = a
    return CoherentSuperposition(((1.0, tuple(amps)),), n_modes)


def test_overlap_coherent_pair_closed_form():
    u, v = 0.7 + 0.2j, -0.3 + 1.1j
    got = overlap(coherent(u), coherent(v))
    want = np.exp(-abs(u) ** 2 / 2 - abs(v) ** 2 / 2 + np.conj(u) * v)
    assert abs(got - want) < 1e-14


def test_overlap_mode_mismatch_rejected():
    with pytest.raises(ValueError):
        overlap(coherent(1.0, n_modes=1), coherent(1.0, n_modes=2))


def test_norm_even_cat_closed_form():
    a = 1.3
    s = CoherentSuperposition(((1.0, (a,)), (1.0, (-a,))), 1)
    assert abs(s.norm() - math.sqrt(2 + 2 * math.exp(-2 * a * a))) < 1e-14
    assert abs(s.normalized().norm() - 1.0) < 1e-14


def test_tensor_overlap_factorizes():
    a = CoherentSuperposition(((1.0, (0.5,)), (0.3j, (-0.5,))), 1)
    b = CoherentSuperposition(((1.0, (1.2j,)),), 1)
    c = CoherentSuperposition(((0.8, (0.1,)), (0.2, (0.9,))), 1)
    d = CoherentSuperposition(((1.0, (-0.4,)),), 1)
    joint = overlap(tensor(a, b), tensor(c, d))
    assert abs(joint - overlap(a, c) * overlap(b, d)) < 1e-13


def test_beam_splitter_norm_and_self_inverse():
    rng = np.random.default_rng(7)
    amps = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    coeffs = rng.normal(size=3) + 1j * rng.normal(size=3)
    s = CoherentSuperposition(
        tuple((c, tuple(a)) for c, a in zip(coeffs, amps)), 2
    ).normalized()
    out = beam_splitter(s, (0, 1))
    assert abs(out.norm() - 1.0) < 1e-12
    back = beam_splitter(out, (0, 1))
    for (c0, a0), (c1, a1) in zip(s.terms, back.terms):
        assert abs(c0 - c1) < 1e-12
        assert max(abs(x - y) for x, y in zip(a0, a1)) < 1e-12


def test_beam_splitter_port_validation():
    s = coherent(1.0, n_modes=2)
    with pytest.raises(ValueError):
        beam_splitter(s, (0, 0))
    with pytest.raises(ValueError):
        beam_splitter(s, (0, 5))


def test_click_probability_coherent_and_empty():
    a = 0.9
    s = coherent(a, n_modes=2, mode=0)
    assert abs(click_probability(s, (0,)) - (1 - math.exp(-a * a))) < 1e-13
    assert click_probability(s, (1,)) < 1e-13
    assert click_probability(s, ()) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        click_probability(s, (0, 0))
    with pytest.raises(ValueError):
        click_probability(s, (3,))


def test_click_probability_odd_cat_is_certain():
    # The odd superposition has zero vacuum amplitude, so a detector on it
    # always fires.
    a = 0.8
    s = CoherentSuperposition(((1.0, (a,)), (-1.0, (-a,))), 1).normalized()
    assert abs(click_probability(s, (0,)) - 1.0) < 1e-12


@pytest.mark.parametrize(
    "m,alpha,eta,q",
    [(1, 1.5, 0.99, 0), (1, 1.0, 0.9, 1), (2, 2.0, 0.95, 3), (3, 2.5, 0.9, 5)],
)
def test_class_overlap_gaussian_matches_fock(m, alpha, eta, q):
    beta = math.sqrt(eta) * alpha
    g0 = cat_superposition(m, beta, 0, q)
    g1 = cat_superposition(m, beta, 1, q)
    gauss = overlap(g0, g1)
    spec = CatCodeSpec(m=m, alpha=alpha, eta=eta)
    f0, _ = error_space_state(spec, 0, q)
    f1, _ = error_space_state(spec, 1, q)
    assert abs(gauss - f0.overlap(f1)) < 1e-10


def test_m1_overlaps_closed_form():
    alpha, eta = 1.2, 0.93
    b = eta * alpha * alpha
    beta = math.sqrt(eta) * alpha
    s0 = overlap(cat_superposition(1, beta, 0, 0), cat_superposition(1, beta, 1, 0))
    s1 = overlap(cat_superposition(1, beta, 0, 1), cat_superposition(1, beta, 1, 1))
    assert abs(s0 - math.cos(b) / math.cosh(b)) < 1e-12
    assert abs(s1 - (-math.sin(b) / math.sinh(b))) < 1e-12


def test_optimal_per_q_matches_fock_route():
    spec = CatCodeSpec(m=1, alpha=1.5, eta=0.99)
    p = optimal_usd_probability(spec, q=0, mode="per_q")
    f0, _ = error_space_state(spec, 0, 0)
    f1, _ = error_space_state(spec, 1, 0)
    assert abs(p - (1 - abs(f0.overlap(f1)))) < 1e-10


def test_optimal_mode_arithmetic():
    spec = CatCodeSpec(m=2, alpha=2.0, eta=0.95)
    per = [optimal_usd_probability(spec, q=r, mode="per_q") for r in range(4)]
    w = loss_weights(spec).p
    want = sum((w[r] + w[r + 4]) * per[r] for r in range(4))
    got = optimal_usd_probability(spec, mode="weighted_average")
    assert abs(got - want) < 1e-12
    assert optimal_usd_probability(spec, mode="worst_case") == pytest.approx(
        min(per)
    )


def test_optimal_validation():
    spec = CatCodeSpec(m=1, alpha=1.0, eta=0.9)
    with pytest.raises(ValueError):
        optimal_usd_probability(spec, mode="typo")
    with pytest.raises(ValueError):
        optimal_usd_probability(spec, q=2, mode="per_q")


@pytest.mark.parametrize("eta", [1.0, 0.9])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
def test_circuit_matches_closed_form(alpha, eta):
    got = linear_optics_usd_probability(alpha, eta)
    assert abs(got - linear_optics_closed_form(alpha, eta)) < 1e-9


@pytest.mark.parametrize("style", ["cat", "coherent"])
@pytest.mark.parametrize("q", [0, 1])
def test_circuit_below_optimal_and_unambiguous(q, style):
    for alpha in (0.5, 1.0, 1.7, 2.5):
        spec = CatCodeSpec(m=1, alpha=alpha, eta=1.0)
        p_opt = optimal_usd_probability(spec, q=q, mode="per_q")
        p_lin = linear_optics_usd_probability(alpha, 1.0, q, style)
        assert p_lin <= p_opt + 1e-12
        out0, out1 = linear_optics_output_states(alpha, 1.0, q, style)
        # Conclusive pattern for the other input never fires.
        assert click_probability(out0, (0, 2)) < 1e-12
        assert click_probability(out1, (1, 3)) < 1e-12


def test_circuit_arms_symmetric():
    out0, out1 = linear_optics_output_states(1.4, 0.95)
    p_cd = click_probability(out0, (1, 3))
    p_ab = click_probability(out1, (0, 2))
    assert abs(p_cd - p_ab) < 1e-12


def test_circuit_validation():
    with pytest.raises(ValueError):
        linear_optics_usd_probability(1.0, q=2)
    with pytest.raises(ValueError):
        linear_optics_usd_probability(1.0, probe_style="squeezed")
    with pytest.raises(ValueError):
        linear_optics_usd_probability(0.0)
    with pytest.raises(ValueError):
        linear_optics_usd_probability(1.0, eta=1.2)


def test_usd_sweep_rows():
    alphas = [0.5, 1.0, 2.0, 3.0]
    rows = usd_sweep(alphas)
    assert [r[0] for r in rows] == alphas
    for a, p_opt, p_lin in rows:
        assert 0 <= p_lin <= p_opt <= 1
        assert abs(p_lin - linear_optics_closed_form(a)) < 1e-9
    # Both approach certainty for a bright signal.
    assert rows[-1][1] > 0.95 and rows[-1][2] > 0.95
