"""Rotation-symmetric bosonic codewords and their loss analytics.

A code of order M = 2^m superposes M rotated copies of a primitive state.
With a coherent primitive (a cat code) everything about pure-loss
transmission reduces to two interleaved exponential series: the class
weights of the lost-photon count mod 2M and the class structure of the
surviving photon number mod M.  Both are evaluated in log domain so the
analytics stay finite far beyond where dense Fock vectors overflow.

Class bookkeeping used throughout the package: losing k photons from a
codeword pair leaves a state that depends on k only through k mod 2M,
and the pair with k' = k + M equals the pair for k with the sign of the
logical-one component flipped.  Hence 2M distinguishable loss classes,
of which the first M are correctable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .fockspace import (
    DEFAULT_POLICY,
    FockVector,
    TruncationPolicy,
    annihilate,
    coherent_state,
    rotation_apply,
)

__all__ = [
    "CatCodeSpec",
    "LossWeights",
    "codeword",
    "damped_codeword",
    "error_space_state",
    "loss_weights",
    "segment_fidelity",
    "orthogonal_codewords",
]

_DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class CatCodeSpec:
    """Code order, primitive amplitude, and end-to-end transmission.

    m is the cascade depth: code order M = 2^m, correctable loss order
    M − 1.  The amplitude is restricted to real α > 0 because every
    closed form below assumes it; the Fock engine has no such
    restriction and is used to cross-check robustness elsewhere.
    """

    m: int
    alpha: float
    eta: float = 1.0

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise ValueError(f"cascade depth m={self.m!r} must be an integer >= 1")
        if isinstance(self.alpha, complex) or not self.alpha > 0.0:
            raise ValueError(f"amplitude alpha={self.alpha!r} must be real and positive")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"transmission eta={self.eta!r} outside (0, 1]")

    @property
    def order(self) -> int:
        return 2 ** self.m

    @property
    def loss_order(self) -> int:
        return 2 ** self.m - 1

    @property
    def n_classes(self) -> int:
        return 2 ** (self.m + 1)

    @property
    def damped_alpha(self) -> float:
        return math.sqrt(self.eta) * self.alpha


@dataclass(frozen=True)
class LossWeights:
    """Probabilities of the 2M loss classes, indexed by q = 0..2M−1."""

    p: np.ndarray
    m: int

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (2 ** (self.m + 1),):
            raise ValueError(f"expected {2 ** (self.m + 1)} class weights, got shape {p.shape}")
        if np.any(p < -1e-15):
            raise ValueError("negative class weight")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"class weights sum to {p.sum()}, not 1")
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    def correctable_mass(self) -> float:
        return float(self.p[: 2 ** self.m].sum())


def codeword(
    spec: CatCodeSpec,
    logical: int,
    primitive: FockVector | None = None,
    policy: TruncationPolicy | None = None,
) -> FockVector:
    """Normalized order-M superposition of rotated primitives.

    Logical 0 uses rotation angles 2kπ/M, logical 1 uses (2k+1)π/M.  The
    default primitive is the coherent state at the requested amplitude.  A
    primitive invariant under the rotation set (vacuum, or any state
    whose support collapses the two logical superpositions onto one ray)
    is rejected.
    """
    if logical not in (0, 1):
        raise ValueError(f"logical label must be 0 or 1, got {logical!r}")
    if primitive is None:
        primitive = coherent_state(spec.alpha, policy or DEFAULT_POLICY)
    big_m = spec.order
    sums = []
    for lbl in (0, 1):
        acc = np.zeros(primitive.dim, dtype=complex)
        for k in range(big_m):
            acc += rotation_apply((2 * k + lbl) * math.pi / big_m, primitive).amps
        sums.append(acc)
    n0, n1 = np.linalg.norm(sums[0]), np.linalg.norm(sums[1])
    if n0 < 1e-12 or n1 < 1e-12:
        raise ValueError(
            "degenerate primitive: a logical superposition has zero norm "
            f"(norms {n0:.3e}, {n1:.3e})"
        )
    cross = abs(np.vdot(sums[0] / n0, sums[1] / n1))
    if cross > 1.0 - _DEGENERACY_TOL:
        raise ValueError(
            "degenerate primitive: the two logical superpositions coincide "
            f"(|overlap| = {cross:.15f})"
        )
    amps = sums[logical] / (n0 if logical == 0 else n1)
    return FockVector(amps, primitive.n_max)


def damped_codeword(
    spec: CatCodeSpec, logical: int, policy: TruncationPolicy | None = None
) -> FockVector:
    """Codeword built from the transmitted primitive |√η α⟩."""
    policy = policy or DEFAULT_POLICY
    primitive = coherent_state(spec.damped_alpha, policy)
    return codeword(spec, logical, primitive, policy)


def error_space_state(
    spec: CatCodeSpec, logical: int, q: int, policy: TruncationPolicy | None = None
):
    """Normalized â^q · damped codeword and its pre-normalization squared norm.

    q indexes the loss class, 0 ≤ q < M.  Classes q + M carry the same
    vectors with the logical-one sign flipped, so they are not built
    separately.
    """
    if not 0 <= q < spec.order:
        raise ValueError(f"loss class q={q} outside [0, {spec.order})")
    base = damped_codeword(spec, logical, policy)
    dropped = annihilate(base, q)
    norm_sq = dropped.norm() ** 2
    if norm_sq < 1e-250:
        raise ValueError(
            f"error-space state (m={spec.m}, logical={logical}, q={q}) has zero norm "
            "under the current truncation; amplitude too small for this loss class"
        )
    return dropped.normalized(), float(norm_sq)


def _log_mod_class_exp(x: float, modulus: int, residue: int) -> float:
    """log Σ_{t ≡ residue (mod modulus)} x^t / t!  for x ≥ 0.

    Series truncated once the next term drops 16 decades below the
    running sum; a trailing guard requires the last term to sit 40 nats
    under the peak so silent truncation cannot happen.
    """
    if not 0 <= residue < modulus:
        raise ValueError("residue outside [0, modulus)")
    if x < 0.0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        return 0.0 if residue == 0 else -math.inf
    log_x = math.log(x)
    n_stop = int(x + 12.0 * math.sqrt(x + 1.0) + 12.0 * modulus + 30.0)
    t = np.arange(residue, n_stop + 1, modulus, dtype=float)
    log_terms = t * log_x - gammaln(t + 1.0)
    if log_terms[-1] > log_terms.max() - 40.0:
        raise ArithmeticError(
            f"class series (x={x:.4g}, mod {modulus}, residue {residue}) "
            "not converged at the default stop; widen the window"
        )
    # drop terms 16 decades under the peak; matches the plain-domain
    # next-term-below-1e-16*sum stopping rule
    keep = log_terms > log_terms.max() + math.log(1e-16)
    return float(logsumexp(log_terms[keep]))


def loss_weights(spec: CatCodeSpec) -> LossWeights:
    """Probability of each loss class q mod 2M for a transmitted codeword.

    Unnormalized class weights factor into a lost-count series S_q over
    t ≡ q (mod 2M) in x = α²(1−η) and a survivor-class series T over
    n ≡ −q (mod M) in y = ηα²; the product is renormalized to sum to 1.
    Both codewords produce the same distribution, so no logical label is
    taken.  The Fock engine arbitrates this construction in the tests.
    """
    big_m = spec.order
    n_cls = spec.n_classes
    if spec.eta == 1.0:
        p = np.zeros(n_cls)
        p[0] = 1.0
        return LossWeights(p, spec.m)
    x = spec.alpha ** 2 * (1.0 - spec.eta)
    y = spec.alpha ** 2 * spec.eta
    log_w = np.empty(n_cls)
    for q in range(n_cls):
        log_s = _log_mod_class_exp(x, n_cls, q)
        log_t = _log_mod_class_exp(y, big_m, (-q) % big_m)
        log_w[q] = log_s + log_t
    log_w -= logsumexp(log_w)
    return LossWeights(np.exp(log_w), spec.m)


def segment_fidelity(spec: CatCodeSpec) -> float:
    """Probability that a transmitted codeword lands in a correctable class."""
    return loss_weights(spec).correctable_mass()


def orthogonal_codewords(spec: CatCodeSpec, policy: TruncationPolicy | None = None):
    """Exactly orthogonal dual pair (|0⟩±|1⟩)/norm at the requested amplitude.

    The two normalization constants differ at finite α, which is what
    makes this variant unattractive as a code; they converge as the
    codeword overlap decays with growing α.
    """
    zero = codeword(spec, 0, policy=policy)
    one = codeword(spec, 1, policy=policy)
    plus = zero.amps + one.amps
    minus = zero.amps - one.amps
    np_, nm = np.linalg.norm(plus), np.linalg.norm(minus)
    if np_ < 1e-12 or nm < 1e-12:
        raise ValueError("degenerate primitive: an orthogonalized combination has zero norm")
    return FockVector(plus / np_, zero.n_max), FockVector(minus / nm, zero.n_max)
