"""Numerical checks of the operator inequalities behind square-root decoding.

Each check evaluates both sides of one inequality exactly (up to floating
point) and reports the slack; a check "holds" when the slack is no worse
than -1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .operators import (
    hermitian_part,
    matrix_sqrt,
    pseudo_sqrt_inverse,
    trace_norm,
    trace_pair,
    validate_density,
    validate_positive,
)

SLACK_TOL = 1e-10


@dataclass(frozen=True)
class LemmaCheckResult:
    lhs: float
    rhs: float
    slack: float
    holds: bool
    instance: str = ""


def check_measurement_on_close_states(sigma, rho, effect, instance: str = "") -> LemmaCheckResult:
    """tr(Pi sigma) >= tr(Pi rho) - ||sigma - rho||_1 for 0 <= Pi <= id."""
    sigma = validate_density(sigma, name="sigma")
    rho = validate_density(rho, name="rho")
    effect = validate_positive(effect, sub_unital=True, name="effect")
    lhs = trace_pair(effect, rho) - trace_norm(sigma - rho)
    rhs = trace_pair(effect, sigma)
    slack = rhs - lhs
    return LemmaCheckResult(lhs=lhs, rhs=rhs, slack=slack, holds=slack >= -SLACK_TOL, instance=instance)


def check_tender_operator(rho, effect, instance: str = "") -> LemmaCheckResult:
    """||rho - sqrt(X) rho sqrt(X)||_1 <= sqrt(8 lambda) with lambda = 1 - tr(rho X)."""
    rho = validate_density(rho, name="rho")
    effect = validate_positive(effect, sub_unital=True, name="effect")
    lam = 1.0 - trace_pair(rho, effect)
    lam = min(max(lam, 0.0), 1.0)
    root = matrix_sqrt(effect)
    lhs = trace_norm(rho - root @ rho @ root)
    rhs = math.sqrt(8.0 * lam)
    slack = rhs - lhs
    return LemmaCheckResult(lhs=lhs, rhs=rhs, slack=slack, holds=slack >= -SLACK_TOL, instance=instance)


def check_hayashi_nagaoka(s_op, t_op, instance: str = "") -> LemmaCheckResult:
    """id - (S+T)^(-1/2) S (S+T)^(-1/2) <= 2(id - S) + 4T in operator order.

    The inverse square root is taken on the support of S+T.  lhs is the
    largest eigenvalue of (left side - right side); slack is its negation.

    The coefficient on (id - S) must be 2: the version with coefficient 1
    that sometimes appears in print is false, e.g. S = |v><v| with
    v = (cos 0.01, sin 0.01), T = 0.05|0><0| gives an operator gap of
    about +0.117 on the wrong side.
    """
    s_op = validate_positive(s_op, sub_unital=True, name="S")
    t_op = validate_positive(t_op, name="T")
    if s_op.shape != t_op.shape:
        raise InvalidInputError("S and T must share a dimension")
    eye = np.eye(s_op.shape[0])
    normalizer = pseudo_sqrt_inverse(s_op + t_op)
    left = eye - normalizer @ s_op @ normalizer
    right = 2.0 * (eye - s_op) + 4.0 * t_op
    gap = np.linalg.eigvalsh(hermitian_part(left - right))
    lhs = float(gap[-1])
    slack = -lhs
    return LemmaCheckResult(lhs=lhs, rhs=0.0, slack=slack, holds=slack >= -SLACK_TOL, instance=instance)


# ---------------------------------------------------------------------------
# Random instance generators (documented distributions, reproducible by seed).
# ---------------------------------------------------------------------------


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Normalized Wishart state: G G† / tr(G G†) with complex Gaussian G."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_subunital_positive(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random Hermitian with eigenvalues clamped into [0, 1]."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = hermitian_part(g)
    w, u = np.linalg.eigh(h)
    w = np.clip(w, 0.0, 1.0)
    return hermitian_part((u * w) @ u.conj().T)


def random_positive(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """Scaled Wishart positive operator (not trace-normalized)."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (g @ g.conj().T) / dim


_LEMMA_NAMES = ("close-states", "tender", "hayashi-nagaoka")


def sweep_lemma_checks(
    trials: int = 1000,
    seed: int = 20240801,
    dims=(2, 3, 4, 5, 6, 7, 8),
    which=_LEMMA_NAMES,
) -> dict:
    """Randomized verification sweeps; returns per-lemma slack summaries."""
    unknown = set(which) - set(_LEMMA_NAMES)
    if unknown:
        raise InvalidInputError(f"unknown lemma names: {sorted(unknown)}")
    dims = tuple(int(d) for d in dims)
    summary = {}
    base = np.random.SeedSequence(seed)
    streams = dict(zip(_LEMMA_NAMES, base.spawn(len(_LEMMA_NAMES))))
    for name in which:
        children = streams[name].spawn(trials)
        min_slack = math.inf
        worst = ""
        failures = 0
        for i, child in enumerate(children):
            rng = np.random.default_rng(child)
            dim = int(rng.choice(dims))
            tag = f"{name}[{i}] dim={dim}"
            if name == "close-states":
                result = check_measurement_on_close_states(
                    random_density(rng, dim),
                    random_density(rng, dim),
                    random_subunital_positive(rng, dim),
                    instance=tag,
                )
            elif name == "tender":
                result = check_tender_operator(
                    random_density(rng, dim), random_subunital_positive(rng, dim), instance=tag
                )
            else:
                result = check_hayashi_nagaoka(
                    random_subunital_positive(rng, dim),
                    random_positive(rng, dim, scale=float(rng.uniform(0.0, 2.0))),
                    instance=tag,
                )
            if result.slack < min_slack:
                min_slack = result.slack
                worst = tag
            if not result.holds:
                failures += 1
        summary[name] = {
            "trials": trials,
            "min_slack": min_slack,
            "worst_instance": worst,
            "failures": failures,
            "all_hold": failures == 0,
        }
    return summary
