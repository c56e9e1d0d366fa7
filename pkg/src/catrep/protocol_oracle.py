"""Brute-force Fock-space simulation of one elementary repeater unit.

Everything the analytic layer claims about a segment is recomputed here
the slow way: prepare the spin-codeword state by the actual measurement
cascade, push it through the loss channel Kraus by Kraus, run the
syndrome cascade branch by branch, entangle the receiving spin, and
discriminate the codeword pair with the ideal unambiguous POVM.  No
closed form from `catcode` enters any state produced here; agreement
between the two routes is the package's core validation.

The same machinery, specialized to pure states, powers
`bell_order_equivalence`, which checks that measuring the middle
station's spin pair before the modes are transmitted is observationally
identical to measuring it after both arms are fully processed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catcode import CatCodeSpec, error_space_state
from .fockspace import (
    DEFAULT_POLICY,
    FockVector,
    HybridDensity,
    TruncationPolicy,
    add_spin,
    apply_mode_operator,
    coherent_state,
    hcrot,
    hybrid_from_vector,
    kraus_op,
    measure_spin,
    trace_distance,
)

__all__ = [
    "UnitReport",
    "bell_vectors",
    "prepare_code_state",
    "prepare_branches",
    "transmit",
    "syndrome_cascade",
    "branch_tree_text",
    "create_entanglement",
    "simulate_unit",
    "bell_order_equivalence",
]

_SQRT2 = math.sqrt(2.0)
_PRUNE = 1e-20


def bell_vectors(theta: float = 0.0) -> dict:
    """Generalized Bell vectors on a (receiver, sender) spin pair.

    Basis order [↑↑, ↑↓, ↓↑, ↓↓]; the phase e^{−iθ} multiplies the
    ↓-first components, so θ=0 gives the standard four Bell states.
    """
    ph = np.exp(-1j * theta)
    rt = 1.0 / _SQRT2
    return {
        "phi_plus": np.array([1.0, 0.0, 0.0, ph]) * rt,
        "phi_minus": np.array([1.0, 0.0, 0.0, -ph]) * rt,
        "psi_plus": np.array([0.0, 1.0, ph, 0.0]) * rt,
        "psi_minus": np.array([0.0, 1.0, -ph, 0.0]) * rt,
    }


def _canonical_pair(m: int, primitive: FockVector):
    """Codeword pair by direct class projection of the primitive."""
    n = np.arange(primitive.dim)
    big_m = 2 ** m
    v = primitive.amps * ((n % big_m) == 0)
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        raise ValueError("degenerate primitive: no support on the code class")
    v = v / nrm
    return v, np.exp(1j * math.pi * n / big_m) * v


def _fixed_cutoff_policy(n_max: int, base: TruncationPolicy | None = None) -> TruncationPolicy:
    base = base or DEFAULT_POLICY
    return TruncationPolicy(
        tail_tol=base.tail_tol,
        n_max_rule=lambda _a: n_max,
        hard_limit=max(base.hard_limit, n_max + 1),
    )


# ---------------------------------------------------------------------------
# preparation


def prepare_code_state(m: int, primitive: FockVector, policy=None) -> HybridDensity:
    """Spin-codeword state from the measured preparation cascade.

    Runs the hcrot ladder with angles π, π/2, …, π/2^{m−1}, keeping the
    all-"+" measurement branch (every other branch is a relabeled copy,
    see `prepare_branches`), then attaches the data spin through the
    final unmeasured hcrot at π/2^m.  Output: (|↑⟩|0_code⟩ + |↓⟩|1_code⟩)/√2.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    v = primitive.amps.astype(complex)
    n = np.arange(v.shape[0])
    for j in range(m):
        # "+" outcome of measuring the step-j ancilla in |±⟩ after
        # hcrot(π/2^j) applies (1 + R)/2
        v = (v + np.exp(1j * math.pi / 2 ** j * n) * v) / 2.0
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        raise ValueError("degenerate primitive: cascade branch has zero norm")
    v = v / nrm
    flip = np.exp(1j * math.pi / 2 ** m * n)
    psi = np.concatenate([v, flip * v]) / _SQRT2
    return hybrid_from_vector(1, primitive.n_max, psi)


def prepare_branches(m: int, primitive: FockVector, policy=None) -> list:
    """All 2^m preparation branches with class-adapted measurement bases.

    Each entry is (outcomes, support_class, probability, state).  The
    measurement basis at step j is (|↑⟩ ± z|↓⟩)/√2 with z chosen from the
    branch's accumulated class so that every branch lands on a clean
    photon-number class; the all-"+" branch is the canonical one, the
    others carry shifted-class codeword pairs related to it by known
    rotations (the relabeling an experiment applies by feed-forward).
    """
    n = np.arange(primitive.dim)
    branches = [((), 0, primitive.amps.astype(complex))]
    for j in range(m):
        phase = np.exp(1j * math.pi / 2 ** j * n)
        nxt = []
        for outs, c, v in branches:
            z = np.exp(2j * math.pi * c / 2 ** (j + 1))
            rv = phase * v
            for lbl, w, c2 in (
                ("+", (v + np.conj(z) * rv) / 2.0, c),
                ("-", (v - np.conj(z) * rv) / 2.0, c + 2 ** j),
            ):
                if float(np.vdot(w, w).real) > 1e-14:
                    nxt.append((outs + (lbl,), c2, w))
        branches = nxt
    big_m = 2 ** m
    flip = np.exp(1j * math.pi / big_m * n)
    out = []
    for outs, c, v in branches:
        prob = float(np.vdot(v, v).real)
        v = v / math.sqrt(prob)
        psi = np.concatenate([v, flip * v]) / _SQRT2
        out.append((outs, c, prob, hybrid_from_vector(1, primitive.n_max, psi)))
    return out


# ---------------------------------------------------------------------------
# transmission


def transmit(s: HybridDensity, eta: float, tail_tol: float = 1e-12) -> HybridDensity:
    """Amplitude damping on the mode factor; spins are spectators."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("transmission eta must lie in (0, 1]")
    if eta == 1.0:
        return s
    ns = 2 ** s.spins
    d = s.mode_dim
    t = s.matrix.reshape(ns, d, ns, d)
    acc = np.zeros_like(t)
    mass = 0.0
    target = s.trace() * (1.0 - tail_tol)
    for k in range(d):
        a = kraus_op(k, eta, s.n_max)
        term = np.einsum("pm,ambn,qn->apbq", a, t, a.conj())
        acc += term
        mass += float(np.einsum("apap->", term).real)
        if mass >= target:
            break
    return HybridDensity(s.spins, s.n_max, acc.reshape(s.dim, s.dim), validate=False)


# ---------------------------------------------------------------------------
# syndrome cascade

_VARIANTS = ("direct", "pi_minus_phi")


def _step_angle(step: int, variant: str) -> float:
    phi = math.pi / 2 ** (step - 1)
    if variant == "direct" or step == 1:
        return phi
    return math.pi - phi


def _step_basis_phase(step: int, c: int, variant: str) -> complex:
    beta = 2.0 * math.pi * c / 2 ** step
    if variant == "direct" or step == 1:
        return complex(np.exp(1j * beta))
    # the complementary angle flips the class parity phase, so the basis
    # absorbs (−1)^c and the conjugate step phase
    return complex((-1.0) ** c * np.exp(-1j * beta))


def _check_variant(variant: str) -> None:
    if variant not in _VARIANTS:
        raise ValueError(f"unknown cascade variant {variant!r}; expected one of {_VARIANTS}")


def _cascade_density(s: HybridDensity, m: int, variant: str) -> list:
    branches = [((), 0, 1.0, s)]
    for step in range(1, m + 1):
        ang = _step_angle(step, variant)
        nxt = []
        for outs, c, prob, st in branches:
            z = _step_basis_phase(step, c, variant)
            anc = st.spins
            grown = hcrot(ang, add_spin(st, (1.0, 1.0)), spin_index=anc)
            plus = np.array([1.0, z]) / _SQRT2
            minus = np.array([1.0, -z]) / _SQRT2
            for lbl, p, post in measure_spin(grown, anc, basis=(plus, minus), labels=("+", "-")):
                c2 = c if lbl == "+" else c + 2 ** (step - 1)
                nxt.append((outs + (lbl,), c2, prob * p, post))
        branches = nxt
    return branches


def syndrome_cascade(s: HybridDensity, m: int, variant: str = "direct") -> list:
    """Extract the loss-count remainder mod 2^m from the mode.

    Runs m hcrot-and-measure steps (angles π, π/2, …, π/2^{m−1}, or their
    π-complements for variant "pi_minus_phi") with measurement bases
    adapted to each branch's accumulated class.  Returns a list of
    (remainder, probability, post_state) sorted by remainder; branches of
    negligible probability are dropped.
    """
    _check_variant(variant)
    out = []
    for _outs, c, prob, st in _cascade_density(s, m, variant):
        out.append(((-c) % (2 ** m), prob, st))
    out.sort(key=lambda t: t[0])
    return out


def branch_tree_text(s: HybridDensity, m: int, variant: str = "direct") -> str:
    """Human-readable dump of the cascade branch tree for debugging."""
    _check_variant(variant)
    lines = [f"syndrome cascade: m={m}, variant={variant}"]
    for outs, c, prob, _st in _cascade_density(s, m, variant):
        path = " ".join(f"step{i + 1}:{o}" for i, o in enumerate(outs))
        lines.append(f"  {path}  class={c % (2 ** m)}  remainder={(-c) % (2 ** m)}  p={prob:.6e}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entanglement creation and discrimination


def create_entanglement(s: HybridDensity, m: int, known_q: int):
    """Reflect the mode off the receiving station's fresh spin.

    The new spin is prepended (index 0, ordering receiver-then-sender)
    in |+⟩ and controls an hcrot at π/2^m.  Returns the grown state and
    the generalized Bell frame for the declared loss class: the info dict
    carries θ = qπ/2^m and the four Bell vectors at that angle.
    """
    if not 0 <= known_q < 2 ** m:
        raise ValueError(f"known_q={known_q} outside [0, {2 ** m})")
    grown = add_spin(s, (1.0, 1.0), front=True)
    ent = hcrot(math.pi / 2 ** m, grown, spin_index=0)
    theta = known_q * math.pi / 2 ** m
    return ent, {"theta": theta, "bell": bell_vectors(theta)}


def _usd_directions(psi0: np.ndarray, psi1: np.ndarray):
    """Kraus directions for the minimum-error-free discrimination of two rays.

    Returns (perp_to_psi1, perp_to_psi0, |overlap|): each success Kraus is
    the rank-one projector onto a perpendicular direction scaled by
    1/√(1+|s|), which makes the cross-identification amplitude exactly
    zero and the per-ray success probability 1 − |s|.
    """
    s_ov = complex(np.vdot(psi0, psi1))
    s_abs = abs(s_ov)
    if s_abs >= 1.0 - 1e-14:
        raise ValueError(
            f"codeword pair indistinguishable (|overlap| = {s_abs:.16f}); "
            "discrimination POVM degenerate"
        )
    scale = 1.0 / math.sqrt(1.0 - s_abs * s_abs)
    perp1 = (psi0 - np.conj(s_ov) * psi1) * scale
    perp0 = (psi1 - s_ov * psi0) * scale
    return perp1, perp0, s_abs


def _usd_kraus(psi0: np.ndarray, psi1: np.ndarray):
    perp1, perp0, s_abs = _usd_directions(psi0, psi1)
    k0 = np.outer(perp1, perp1.conj()) / math.sqrt(1.0 + s_abs)
    k1 = np.outer(perp0, perp0.conj()) / math.sqrt(1.0 + s_abs)
    return k0, k1, s_abs


@dataclass(frozen=True)
class UnitReport:
    """Everything the oracle measures about one elementary unit.

    weights reconstructs the 2M loss-class distribution operationally:
    index r < M carries the syndrome-r probability times the conditional
    plus-Bell weight, index r+M the minus-Bell remainder.  spin_states
    holds the conditional receiver-sender spin density after a
    successful "codeword 0" identification, one per remainder (None for
    remainders of negligible probability).
    """

    m: int
    alpha: float
    eta: float
    f0_oracle: float
    weights: np.ndarray
    syndrome_probs: np.ndarray
    plus_weight: np.ndarray
    usd_success: np.ndarray
    p_success_weighted: float
    spin_states: tuple
    thetas: np.ndarray


def simulate_unit(spec: CatCodeSpec, policy=None, variant: str = "direct") -> UnitReport:
    """Full pipeline: prepare → transmit → syndrome → entangle → discriminate.

    All states stay at the cutoff chosen for the undamped primitive so
    cross-module vectors compose exactly.
    """
    policy = policy or DEFAULT_POLICY
    prim = coherent_state(spec.alpha, policy)
    forced = _fixed_cutoff_policy(prim.n_max, policy)
    prep = prepare_code_state(spec.m, prim)
    trans = transmit(prep, spec.eta)
    branches = syndrome_cascade(trans, spec.m, variant)
    big_m = spec.order
    weights = np.zeros(2 * big_m)
    syn = np.zeros(big_m)
    plus = np.zeros(big_m)
    succ = np.zeros(big_m)
    states: list = [None] * big_m
    thetas = np.array([r * math.pi / big_m for r in range(big_m)])
    for r, prob, st in branches:
        psi0, _ = error_space_state(spec, 0, r, forced)
        psi1, _ = error_space_state(spec, 1, r, forced)
        k0, k1, _s = _usd_kraus(psi0.amps, psi1.amps)
        ent, info = create_entanglement(st, spec.m, known_q=r)
        out0 = apply_mode_operator(ent, k0)
        out1 = apply_mode_operator(ent, k1)
        p0, p1 = out0.trace(), out1.trace()
        rho0 = out0.spin_density() / p0
        bells = info["bell"]
        f_plus = float(np.real(np.vdot(bells["phi_plus"], rho0 @ bells["phi_plus"])))
        f_minus = float(np.real(np.vdot(bells["phi_minus"], rho0 @ bells["phi_minus"])))
        syn[r] = prob
        plus[r] = f_plus
        succ[r] = p0 + p1
        weights[r] = prob * f_plus
        weights[r + big_m] = prob * f_minus
        states[r] = rho0
    return UnitReport(
        m=spec.m,
        alpha=spec.alpha,
        eta=spec.eta,
        f0_oracle=float(weights[:big_m].sum()),
        weights=weights,
        syndrome_probs=syn,
        plus_weight=plus,
        usd_success=succ,
        p_success_weighted=float(np.dot(syn, succ)),
        spin_states=tuple(states),
        thetas=thetas,
    )


# ---------------------------------------------------------------------------
# measurement-ordering equivalence (pure-state engines)


def _pure_cascade(x: np.ndarray, axis: int, n: np.ndarray, m: int, variant: str) -> list:
    """Branch a pure array over the syndrome cascade applied to one mode axis."""
    branches = [(0, x)]
    for step in range(1, m + 1):
        ang = _step_angle(step, variant)
        shape = [1] * x.ndim
        shape[axis] = n.shape[0]
        ph = np.exp(1j * ang * n).reshape(shape)
        nxt = []
        for c, v in branches:
            z = _step_basis_phase(step, c, variant)
            rv = ph * v
            vp = (v + np.conj(z) * rv) / 2.0
            vm = (v - np.conj(z) * rv) / 2.0
            if float(np.vdot(vp, vp).real) > _PRUNE:
                nxt.append((c, vp))
            if float(np.vdot(vm, vm).real) > _PRUNE:
                nxt.append((c + 2 ** (step - 1), vm))
        branches = nxt
    return branches


def _usd_pairs(spec: CatCodeSpec, n_max: int, policy) -> list:
    forced = _fixed_cutoff_policy(n_max, policy)
    pairs = []
    for r in range(spec.order):
        psi0, _ = error_space_state(spec, 0, r, forced)
        psi1, _ = error_space_state(spec, 1, r, forced)
        pairs.append(_usd_directions(psi0.amps, psi1.amps))
    return pairs


def _arm_records(spec: CatCodeSpec, policy, variant: str) -> dict:
    """Process one arm fully, ES spin left unmeasured.

    Returns {(remainder, usd_outcome): [2×2 amplitude arrays over
    (endpoint spin, ES spin)]}; entries are unnormalized pure branches
    whose squared norms are probabilities.
    """
    prim = coherent_state(spec.alpha, policy)
    d = prim.dim
    n = np.arange(d)
    big_m = spec.order
    cw0, cw1 = _canonical_pair(spec.m, prim)
    v0 = np.stack([cw0, cw1]) / _SQRT2
    flip = np.exp(1j * math.pi * n / big_m)
    pairs = _usd_pairs(spec, prim.n_max, policy)
    records: dict = {}
    for k in range(d):
        a = kraus_op(k, spec.eta, prim.n_max)
        w = np.einsum("mn,sn->sm", a, v0)
        if float(np.vdot(w, w).real) < _PRUNE:
            continue
        for c, x in _pure_cascade(w, 1, n, spec.m, variant):
            r = (-c) % big_m
            chi = np.stack([x, flip[None, :] * x]) / _SQRT2
            perp1, perp0, s_abs = pairs[r]
            scale = 1.0 / math.sqrt(1.0 + s_abs)
            y0 = np.einsum("n,bsn->bs", perp1.conj(), chi) * scale
            y1 = np.einsum("n,bsn->bs", perp0.conj(), chi) * scale
            records.setdefault((r, 0), []).append(y0)
            records.setdefault((r, 1), []).append(y1)
    return records


def _combine_arms(rec_left: dict, rec_right: dict, bells: dict) -> dict:
    out: dict = {}
    for (r1, u1), ys1 in rec_left.items():
        for (r2, u2), ys2 in rec_right.items():
            for lbl, bvec in bells.items():
                rho = np.zeros((4, 4), dtype=complex)
                for y1 in ys1:
                    for y2 in ys2:
                        chi = np.einsum("st,as,bt->ab", bvec.conj(), y1, y2).reshape(-1)
                        rho += np.outer(chi, chi.conj())
                out[(lbl, r1, u1, r2, u2)] = rho
    return out


def _joint_records(spec: CatCodeSpec, policy, bells: dict, variant: str) -> dict:
    """Bell-first ordering: project the ES pair, then process both modes."""
    prim = coherent_state(spec.alpha, policy)
    d = prim.dim
    n = np.arange(d)
    big_m = spec.order
    cw0, cw1 = _canonical_pair(spec.m, prim)
    v0 = np.stack([cw0, cw1]) / _SQRT2
    flip = np.exp(1j * math.pi * n / big_m)
    pairs = _usd_pairs(spec, prim.n_max, policy)
    kr = [kraus_op(k, spec.eta, prim.n_max) for k in range(d)]
    joint = np.einsum("sm,tn->stmn", v0, v0)
    out: dict = {}

    def bump(key, chi):
        if key not in out:
            out[key] = np.zeros((4, 4), dtype=complex)
        flat = chi.reshape(-1)
        out[key] += np.outer(flat, flat.conj())

    for lbl, bvec in bells.items():
        modes = np.einsum("st,stmn->mn", bvec.conj(), joint)
        for k1 in range(d):
            t1 = np.einsum("pm,mn->pn", kr[k1], modes)
            if float(np.vdot(t1, t1).real) < _PRUNE:
                continue
            for k2 in range(d):
                t = np.einsum("qn,pn->pq", kr[k2], t1)
                if float(np.vdot(t, t).real) < _PRUNE:
                    continue
                ua = np.stack([t, flip[:, None] * t]) / _SQRT2  # (a, nL, nR)
                for c1, x1 in _pure_cascade(ua, 1, n, spec.m, variant):
                    r1 = (-c1) % big_m
                    perp1, perp0, s_abs = pairs[r1]
                    scale = 1.0 / math.sqrt(1.0 + s_abs)
                    for u1, perp in ((0, perp1), (1, perp0)):
                        y = np.einsum("p,apq->aq", perp.conj(), x1) * scale
                        if float(np.vdot(y, y).real) < _PRUNE:
                            continue
                        vb = np.stack([y, flip[None, :] * y], axis=1) / _SQRT2  # (a, b, nR)
                        for c2, x2 in _pure_cascade(vb, 2, n, spec.m, variant):
                            r2 = (-c2) % big_m
                            q1, q0, s2 = pairs[r2]
                            sc2 = 1.0 / math.sqrt(1.0 + s2)
                            for u2, perp_b in ((0, q1), (1, q0)):
                                chi = np.einsum("q,abq->ab", perp_b.conj(), x2) * sc2
                                if float(np.vdot(chi, chi).real) < _PRUNE:
                                    continue
                                bump((lbl, r1, u1, r2, u2), chi)
    return out


def bell_order_equivalence(
    m: int,
    alpha: float,
    eta: float,
    policy=None,
    variant: str = "direct",
    return_records: bool = False,
):
    """Max observable discrepancy between Bell-before and Bell-after orderings.

    Both engines enumerate every branch of a two-arm unit (middle station
    with two spins, endpoints Alice and Bob) and group outcomes by the
    full classical record (Bell result, per-arm remainder, per-arm USD
    outcome).  Returned is the maximum over records of the trace
    distance between conditional endpoint spin states or the probability
    mismatch, whichever is larger.
    """
    _check_variant(variant)
    policy = policy or DEFAULT_POLICY
    spec = CatCodeSpec(m, alpha, eta)
    bells = {lbl: vec.reshape(2, 2) for lbl, vec in bell_vectors(0.0).items()}
    arm = _arm_records(spec, policy, variant)
    rec_after = _combine_arms(arm, arm, bells)
    rec_before = _joint_records(spec, policy, bells, variant)
    worst = 0.0
    records = {}
    for key in set(rec_after) | set(rec_before):
        ra = rec_before.get(key)
        rb = rec_after.get(key)
        pa = float(np.trace(ra).real) if ra is not None else 0.0
        pb = float(np.trace(rb).real) if rb is not None else 0.0
        if max(pa, pb) < 1e-12:
            continue
        if min(pa, pb) < 1e-12:
            dist = 1.0
        else:
            dist = trace_distance(ra / pa, rb / pb)
        worst = max(worst, dist, abs(pa - pb))
        records[key] = (pa, pb, ra, rb)
    if return_records:
        return worst, records
    return worst
