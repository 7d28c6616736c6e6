"""Random codebooks, square-root-measurement decoding, and end-to-end runs.

The decoder construction sandwiches each word's conditional typical projector
between averaged-state projectors, sums the resulting detection operators
over the messages that share a side-information index, and normalizes with
the pseudo inverse square root of the sum.  All error figures are exact
traces; sampling enters only through codebook generation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import BroadcastCQChannel, CQChannel, MACCQChannel, holevo_chi, output_state
from .errors import ExpurgationError, InvalidInputError, ResourceLimitError
from .operators import (
    DEFAULT_DIM_CAP,
    ProbabilityDistribution,
    hermitian_part,
    pseudo_sqrt_inverse,
    trace_pair,
)
from .typicality import (
    PRESET_FIXED,
    conditional_typical_projector,
    resolve_preset,
    spectrum_projector_stats,
    typical_projector,
    typical_sequences,
)


@dataclass(frozen=True)
class Codebook:
    """Sampled word table indexed by message pairs (m1, m2)."""

    n: int
    m1_size: int
    m2_size: int
    words: dict  # (m1, m2) -> tuple of letters
    dist: ProbabilityDistribution
    delta_code: float
    seed: int

    def word(self, m1: int, m2: int) -> tuple:
        try:
            return self.words[(m1, m2)]
        except KeyError:
            raise InvalidInputError(f"message pair ({m1}, {m2}) outside the codebook") from None

    def distinct_words(self) -> list:
        seen = []
        for pair in sorted(self.words):
            w = self.words[pair]
            if w not in seen:
                seen.append(w)
        return seen


def _sample_typical_word(rng, dist, typical_set, n, max_tries):
    d = len(dist.labels)
    for _ in range(max_tries):
        draw = rng.choice(d, size=n, p=dist.weights)
        word = tuple(dist.labels[i] for i in draw)
        if word in typical_set:
            return word
    raise ResourceLimitError(
        f"rejection sampling failed to hit the typical set within {max_tries} tries"
    )


def sample_codebook(
    dist: ProbabilityDistribution,
    n: int,
    m1_size: int,
    m2_size: int,
    delta_code: float = 0.5,
    seed: int = 0,
    max_tries: int = 100_000,
) -> Codebook:
    """Draw words i.i.d. from the input distribution, kept only when typical."""
    if m1_size < 1 or m2_size < 1:
        raise InvalidInputError("message set sizes must be >= 1")
    tset = typical_sequences(dist, n, delta_code)
    if tset.is_empty():
        raise InvalidInputError(
            f"typical set is empty for n={n}, delta={delta_code}; no words to sample"
        )
    rng = np.random.default_rng(seed)
    words = {}
    for m1 in range(m1_size):
        for m2 in range(m2_size):
            words[(m1, m2)] = _sample_typical_word(rng, dist, tset, n, max_tries)
    return Codebook(
        n=n,
        m1_size=m1_size,
        m2_size=m2_size,
        words=words,
        dist=dist,
        delta_code=delta_code,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Detection operators and square-root normalization.
# ---------------------------------------------------------------------------


def _sandwiched_detection(channel: CQChannel, words, dist, alpha, preset, dim_cap):
    """Averaged-state projector plus, per word, the sandwiched detection operator.

    Returns (projector, {word: dense op}, {word: factor or None}, {word: rank}).
    The factor F satisfies D' = F F† and keeps later products cheap when the
    conditional projector rank is small.
    """
    n = len(words[0])
    if channel.output_dim**n > dim_cap:
        raise ResourceLimitError(
            f"detection space dimension {channel.output_dim}^{n} exceeds cap {dim_cap}"
        )
    a_size = len(channel.alphabet)
    proj = typical_projector(
        output_state(channel, dist), n, alpha * math.sqrt(a_size), preset, dim_cap
    )
    pi = proj.matrix()
    total = channel.output_dim**n
    dense, factors, ranks = {}, {}, {}
    for w in words:
        if w in dense:
            continue
        cond = conditional_typical_projector(channel, w, alpha, preset, dim_cap)
        ranks[w] = cond.rank
        if cond.rank == 0:
            dense[w] = np.zeros((total, total), dtype=complex)
            factors[w] = np.zeros((total, 0), dtype=complex)
        elif cond.rank <= total // 2:
            f = pi @ cond.included_vectors()
            dense[w] = hermitian_part(f @ f.conj().T)
            factors[w] = f
        else:
            dense[w] = hermitian_part(pi @ cond.matrix() @ pi)
            factors[w] = None
    return proj, dense, factors, ranks


@dataclass(frozen=True, eq=False)
class DetectionOperators:
    """Per-word sandwiched detection operators for both receivers."""

    codebook: Codebook
    alpha: float
    preset: str
    projectors: dict  # receiver -> TypicalProjector of the averaged state
    dprime: dict  # receiver -> {(m1, m2): dense operator}
    factors: dict  # receiver -> {(m1, m2): factor or None}
    cond_ranks: dict  # receiver -> {(m1, m2): conditional projector rank}

    def op(self, receiver: int, m1: int, m2: int) -> np.ndarray:
        return self.dprime[receiver][(m1, m2)]


def build_detection_operators(
    codebook: Codebook,
    bc: BroadcastCQChannel,
    alpha: float = 1.0,
    preset: str = PRESET_FIXED,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> DetectionOperators:
    preset = resolve_preset(preset)
    words = [codebook.words[pair] for pair in sorted(codebook.words)]
    projectors, dprime, factors, ranks = {}, {}, {}, {}
    for receiver in (1, 2):
        proj, dense_by_word, factor_by_word, rank_by_word = _sandwiched_detection(
            bc.marginal(receiver), words, codebook.dist, alpha, preset, dim_cap
        )
        projectors[receiver] = proj
        dprime[receiver] = {
            pair: dense_by_word[codebook.words[pair]] for pair in sorted(codebook.words)
        }
        factors[receiver] = {
            pair: factor_by_word[codebook.words[pair]] for pair in sorted(codebook.words)
        }
        ranks[receiver] = {
            pair: rank_by_word[codebook.words[pair]] for pair in sorted(codebook.words)
        }
    return DetectionOperators(
        codebook=codebook,
        alpha=float(alpha),
        preset=preset,
        projectors=projectors,
        dprime=dprime,
        factors=factors,
        cond_ranks=ranks,
    )


def _normalize_group(dense_ops, factor_ops):
    """Square-root normalization of one detection-operator group.

    Returns (normalized ops, margin) where margin is the largest eigenvalue
    of (sum of normalized ops - identity); a sub-POVM keeps it <= ~0.
    """
    total = sum(dense_ops)
    inv_root = pseudo_sqrt_inverse(total)
    ops = []
    for dense, factor in zip(dense_ops, factor_ops):
        if factor is not None:
            g = inv_root @ factor
            ops.append(hermitian_part(g @ g.conj().T))
        else:
            ops.append(hermitian_part(inv_root @ dense @ inv_root))
    acc = sum(ops) - np.eye(total.shape[0])
    margin = float(np.linalg.eigvalsh(hermitian_part(acc))[-1])
    return ops, margin


@dataclass(frozen=True, eq=False)
class SquareRootDecoder:
    """Normalized decoding operators; receiver r resolves its own message index
    given the other index as side information."""

    m1_size: int
    m2_size: int
    ops: dict  # receiver -> {(m1, m2): operator}
    subpovm_margins: dict  # receiver 1: {m2: margin}; receiver 2: {m1: margin}

    def op(self, receiver: int, m1: int, m2: int) -> np.ndarray:
        try:
            return self.ops[receiver][(m1, m2)]
        except KeyError:
            raise InvalidInputError(
                f"decoder has no operator for receiver {receiver}, pair ({m1}, {m2})"
            ) from None


def build_square_root_decoder(detection: DetectionOperators) -> SquareRootDecoder:
    cb = detection.codebook
    ops = {1: {}, 2: {}}
    margins = {1: {}, 2: {}}
    for m2 in range(cb.m2_size):
        dense = [detection.dprime[1][(m1, m2)] for m1 in range(cb.m1_size)]
        factors = [detection.factors[1][(m1, m2)] for m1 in range(cb.m1_size)]
        group, margin = _normalize_group(dense, factors)
        margins[1][m2] = margin
        for m1 in range(cb.m1_size):
            ops[1][(m1, m2)] = group[m1]
    for m1 in range(cb.m1_size):
        dense = [detection.dprime[2][(m1, m2)] for m2 in range(cb.m2_size)]
        factors = [detection.factors[2][(m1, m2)] for m2 in range(cb.m2_size)]
        group, margin = _normalize_group(dense, factors)
        margins[2][m1] = margin
        for m2 in range(cb.m2_size):
            ops[2][(m1, m2)] = group[m2]
    return SquareRootDecoder(
        m1_size=cb.m1_size, m2_size=cb.m2_size, ops=ops, subpovm_margins=margins
    )


# ---------------------------------------------------------------------------
# Exact error evaluation.
# ---------------------------------------------------------------------------


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else float(x)


def first_kind_error(
    codebook: Codebook,
    bc: BroadcastCQChannel,
    decoder: SquareRootDecoder,
    m1: int,
    m2: int,
) -> tuple[float, float]:
    """Exact missed-detection probabilities of both receivers for one pair."""
    w = codebook.word(m1, m2)
    out = []
    for receiver in (1, 2):
        state = bc.marginal(receiver).word_state(w)
        out.append(_clamp01(1.0 - trace_pair(decoder.op(receiver, m1, m2), state)))
    return out[0], out[1]


@dataclass(frozen=True)
class ErrorReport:
    """Exact per-pair errors, their side-information averages, and decomposition bounds."""

    n: int
    m1_size: int
    m2_size: int
    first_kind: dict  # receiver -> {(m1, m2): error}
    collisions: dict  # receiver -> {(m1, m2): summed cross-word detection mass}
    decomposition_bounds: dict  # receiver -> {(m1, m2): 2 * miss + 4 * collision}
    avg_by_m2: dict  # receiver-1 error averaged over m1, per m2
    avg_by_m1: dict  # receiver-2 error averaged over m2, per m1
    overall: dict  # receiver -> average over all pairs
    decomposition_ok: bool

    def as_dict(self) -> dict:
        def table(d):
            return {f"{m1},{m2}": v for (m1, m2), v in sorted(d.items())}

        return {
            "n": self.n,
            "m1_size": self.m1_size,
            "m2_size": self.m2_size,
            "first_kind_1": table(self.first_kind[1]),
            "first_kind_2": table(self.first_kind[2]),
            "collision_1": table(self.collisions[1]),
            "collision_2": table(self.collisions[2]),
            "decomposition_bound_1": table(self.decomposition_bounds[1]),
            "decomposition_bound_2": table(self.decomposition_bounds[2]),
            "avg_by_m2": {str(k): v for k, v in sorted(self.avg_by_m2.items())},
            "avg_by_m1": {str(k): v for k, v in sorted(self.avg_by_m1.items())},
            "overall_1": self.overall[1],
            "overall_2": self.overall[2],
            "decomposition_ok": self.decomposition_ok,
        }


def average_errors(
    codebook: Codebook,
    bc: BroadcastCQChannel,
    decoder: SquareRootDecoder,
    detection: DetectionOperators | None = None,
) -> ErrorReport:
    """Exact error tables; with detection operators the normalization-removal
    bound (miss + 4x collision mass) is checked per pair."""
    first = {1: {}, 2: {}}
    coll = {1: {}, 2: {}}
    bounds = {1: {}, 2: {}}
    states = {}
    for receiver in (1, 2):
        marg = bc.marginal(receiver)
        cache = {}
        for pair in sorted(codebook.words):
            w = codebook.words[pair]
            if w not in cache:
                cache[w] = marg.word_state(w)
        states[receiver] = cache
    for m1 in range(codebook.m1_size):
        for m2 in range(codebook.m2_size):
            w = codebook.words[(m1, m2)]
            for receiver in (1, 2):
                state = states[receiver][w]
                err = _clamp01(1.0 - trace_pair(decoder.op(receiver, m1, m2), state))
                first[receiver][(m1, m2)] = err
                if detection is not None:
                    if receiver == 1:
                        others = [
                            detection.dprime[1][(k, m2)]
                            for k in range(codebook.m1_size)
                            if k != m1
                        ]
                    else:
                        others = [
                            detection.dprime[2][(m1, k)]
                            for k in range(codebook.m2_size)
                            if k != m2
                        ]
                    mass = sum(_clamp01(trace_pair(op, state)) for op in others)
                    coll[receiver][(m1, m2)] = mass
                    miss = _clamp01(
                        1.0 - trace_pair(detection.dprime[receiver][(m1, m2)], state)
                    )
                    bounds[receiver][(m1, m2)] = 2.0 * miss + 4.0 * mass
    avg_by_m2 = {
        m2: float(np.mean([first[1][(m1, m2)] for m1 in range(codebook.m1_size)]))
        for m2 in range(codebook.m2_size)
    }
    avg_by_m1 = {
        m1: float(np.mean([first[2][(m1, m2)] for m2 in range(codebook.m2_size)]))
        for m1 in range(codebook.m1_size)
    }
    overall = {
        1: float(np.mean(list(first[1].values()))),
        2: float(np.mean(list(first[2].values()))),
    }
    ok = True
    if detection is not None:
        for receiver in (1, 2):
            for pair, err in first[receiver].items():
                if err > bounds[receiver][pair] + 1e-9:
                    ok = False
    return ErrorReport(
        n=codebook.n,
        m1_size=codebook.m1_size,
        m2_size=codebook.m2_size,
        first_kind=first,
        collisions=coll,
        decomposition_bounds=bounds,
        avg_by_m2=avg_by_m2,
        avg_by_m1=avg_by_m1,
        overall=overall,
        decomposition_ok=ok,
    )


def second_kind_collision_check(
    dist: ProbabilityDistribution,
    bc: BroadcastCQChannel,
    n: int,
    alpha: float,
    preset: str = PRESET_FIXED,
    trials: int = 200,
    seed: int = 0,
    *,
    delta_code: float = 0.5,
    exact: bool = False,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> dict:
    """Collision mass of receiver 2's detection operators on wrong-word states.

    Estimates E[tr(W2(X) D'(X'))] over independent typical words X, X' and
    compares it against the rigorous equipartition-times-rank budget, reported
    both directly and as the exponent offset eps_slack with
    budget = 2^(-n (chi2 - eps_slack)).  With exact=True the expectation is
    evaluated exactly by enumerating the typical set.
    """
    preset = resolve_preset(preset)
    channel = bc.marginal(2)
    if channel.output_dim**n > dim_cap:
        raise ResourceLimitError(
            f"collision check dimension {channel.output_dim}^{n} exceeds cap {dim_cap}"
        )
    a_size = len(channel.alphabet)
    avg = output_state(channel, dist)
    proj = typical_projector(avg, n, alpha * math.sqrt(a_size), preset, dim_cap)
    pi = proj.matrix()
    tset = typical_sequences(dist, n, delta_code)
    typical_mass = tset.probability()
    if typical_mass <= 0.0:
        raise InvalidInputError("typical set has zero mass; cannot sample words")
    lam_max = spectrum_projector_stats(proj.eigenvalues, n, proj.tau).lambda_max
    chi2 = holevo_chi(channel, dist)

    def dprime_of(word):
        cond = conditional_typical_projector(channel, word, alpha, preset, dim_cap)
        if cond.rank == 0:
            dim = channel.output_dim**n
            return np.zeros((dim, dim), dtype=complex), 0
        f = pi @ cond.included_vectors()
        return hermitian_part(f @ f.conj().T), cond.rank

    if exact:
        words = list(tset.members())
        rho_mix = None
        d_mix = None
        mean_rank = 0.0
        for w in words:
            p = math.prod(dist.weight(a) for a in w) / typical_mass
            dmat, rank = dprime_of(w)
            state = channel.word_state(w)
            rho_mix = p * state if rho_mix is None else rho_mix + p * state
            d_mix = p * dmat if d_mix is None else d_mix + p * dmat
            mean_rank += p * rank
        estimate = _clamp01(trace_pair(rho_mix, d_mix))
        trials_used = len(words) ** 2
    else:
        rng = np.random.default_rng(seed)
        total = 0.0
        mean_rank = 0.0
        for _ in range(trials):
            x = _sample_typical_word(rng, dist, tset, n, 100_000)
            x_prime = _sample_typical_word(rng, dist, tset, n, 100_000)
            dmat, rank = dprime_of(x_prime)
            total += _clamp01(trace_pair(channel.word_state(x), dmat))
            mean_rank += rank
        estimate = total / trials
        mean_rank /= trials
        trials_used = trials

    budget = lam_max * mean_rank / typical_mass
    eps_slack = chi2 + (math.log2(budget) / n if budget > 0.0 else -math.inf)
    return {
        "n": n,
        "alpha": float(alpha),
        "preset": preset,
        "exact": exact,
        "trials": trials_used,
        "estimate": float(estimate),
        "budget": float(budget),
        "within_budget": bool(estimate <= budget + 1e-12),
        "chi2_bits": float(chi2),
        "eps_slack": float(eps_slack),
        "mean_conditional_rank": float(mean_rank),
        "lambda_max": float(lam_max),
        "typical_mass": float(typical_mass),
    }


# ---------------------------------------------------------------------------
# Expurgation and side-information decoding.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpurgationResult:
    """Kept message subsets with their per-message error records."""

    m1_kept: tuple
    m2_kept: tuple
    delta: float
    selection_error_by_m2: dict  # kept m2 -> average over the full original m1 set
    selection_error_by_m1: dict
    final_error_by_m2: dict  # kept m2 -> average over the kept m1 subset
    final_error_by_m1: dict
    within_two_delta: bool
    within_four_delta: bool

    def as_dict(self) -> dict:
        return {
            "m1_kept": list(self.m1_kept),
            "m2_kept": list(self.m2_kept),
            "delta": self.delta,
            "selection_error_by_m2": {str(k): v for k, v in sorted(self.selection_error_by_m2.items())},
            "selection_error_by_m1": {str(k): v for k, v in sorted(self.selection_error_by_m1.items())},
            "final_error_by_m2": {str(k): v for k, v in sorted(self.final_error_by_m2.items())},
            "final_error_by_m1": {str(k): v for k, v in sorted(self.final_error_by_m1.items())},
            "within_two_delta": self.within_two_delta,
            "within_four_delta": self.within_four_delta,
        }


def expurgate(
    codebook: Codebook,
    decoder: SquareRootDecoder | None,
    errors: ErrorReport,
    delta: float,
) -> ExpurgationResult:
    """Keep the better half of each message set when the global averages allow it.

    Selection keeps the ceil(size/2) indices with the smallest averaged error
    (ties to the lower index); a global average <= delta pins each selected
    average at <= 2*delta and each restricted average at <= 4*delta.
    """
    if delta <= 0.0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    if errors.overall[1] > delta or errors.overall[2] > delta:
        raise ExpurgationError(
            f"average errors ({errors.overall[1]:.4g}, {errors.overall[2]:.4g}) exceed delta={delta}"
        )
    keep2 = math.ceil(errors.m2_size / 2)
    order2 = sorted(range(errors.m2_size), key=lambda m2: (errors.avg_by_m2[m2], m2))
    m2_kept = tuple(sorted(order2[:keep2]))
    keep1 = math.ceil(errors.m1_size / 2)
    order1 = sorted(range(errors.m1_size), key=lambda m1: (errors.avg_by_m1[m1], m1))
    m1_kept = tuple(sorted(order1[:keep1]))

    sel2 = {m2: errors.avg_by_m2[m2] for m2 in m2_kept}
    sel1 = {m1: errors.avg_by_m1[m1] for m1 in m1_kept}
    fin2 = {
        m2: float(np.mean([errors.first_kind[1][(m1, m2)] for m1 in m1_kept]))
        for m2 in m2_kept
    }
    fin1 = {
        m1: float(np.mean([errors.first_kind[2][(m1, m2)] for m2 in m2_kept]))
        for m1 in m1_kept
    }
    return ExpurgationResult(
        m1_kept=m1_kept,
        m2_kept=m2_kept,
        delta=float(delta),
        selection_error_by_m2=sel2,
        selection_error_by_m1=sel1,
        final_error_by_m2=fin2,
        final_error_by_m1=fin1,
        within_two_delta=all(v <= 2.0 * delta + 1e-12 for v in list(sel2.values()) + list(sel1.values())),
        within_four_delta=all(v <= 4.0 * delta + 1e-12 for v in list(fin2.values()) + list(fin1.values())),
    )


def decode_with_side_info(
    decoder: SquareRootDecoder,
    receiver: int,
    known_message: int,
    state: np.ndarray,
    mode: str = "argmax",
    rng: np.random.Generator | None = None,
):
    """Apply one side-information decoding group to an output state.

    Receiver 1 knows m2 and resolves m1; receiver 2 the reverse.  Outcome
    probabilities are exact traces; "argmax" returns the most likely message,
    "sampled" draws from the full outcome distribution and returns None on
    the complement outcome.
    """
    if receiver not in (1, 2):
        raise InvalidInputError(f"receiver must be 1 or 2, got {receiver!r}")
    if mode not in ("argmax", "sampled"):
        raise InvalidInputError(f"unknown decode mode {mode!r}")
    own_size = decoder.m1_size if receiver == 1 else decoder.m2_size
    other_size = decoder.m2_size if receiver == 1 else decoder.m1_size
    if not 0 <= known_message < other_size:
        raise InvalidInputError(f"known message {known_message} outside its set")
    if receiver == 1:
        ops = [decoder.op(1, m, known_message) for m in range(own_size)]
    else:
        ops = [decoder.op(2, known_message, m) for m in range(own_size)]
    probs = np.array([_clamp01(trace_pair(op, state)) for op in ops])
    if mode == "argmax":
        return int(np.argmax(probs))
    rng = rng if rng is not None else np.random.default_rng(0)
    fail = _clamp01(1.0 - float(probs.sum()))
    full = np.append(probs, fail)
    full = full / full.sum()
    outcome = int(rng.choice(len(full), p=full))
    return None if outcome == own_size else outcome


def modular_sum_encode(m1: int, m2: int, size: int) -> int:
    """Relay's common message for the sum-forwarding scheme."""
    if size < 1:
        raise InvalidInputError("message set size must be >= 1")
    if not 0 <= m1 < size or not 0 <= m2 < size:
        raise InvalidInputError(f"messages ({m1}, {m2}) outside range(0, {size})")
    return (m1 + m2) % size


def modular_sum_decode(common: int, known: int, size: int) -> int:
    """Recover the partner's message from the common message and one's own."""
    if size < 1:
        raise InvalidInputError("message set size must be >= 1")
    if not 0 <= common < size or not 0 <= known < size:
        raise InvalidInputError(f"values ({common}, {known}) outside range(0, {size})")
    return (common - known) % size


# ---------------------------------------------------------------------------
# End-to-end broadcast-phase simulation.
# ---------------------------------------------------------------------------

_SCHEMES = ("proof-construction", "modular-sum")


@dataclass
class SimConfig:
    """Configuration of one broadcast-phase run."""

    n: int
    alpha: float = 1.0
    preset: str = PRESET_FIXED
    delta_code: float = 0.5
    epsilon: float | None = None
    m1_size: int | None = None
    m2_size: int | None = None
    seed: int = 0
    scheme: str = "proof-construction"
    max_seed_attempts: int = 8
    delta: float = 0.25
    dist: tuple | None = None
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError(f"block length must be >= 1, got {self.n}")
        self.preset = resolve_preset(self.preset)
        if self.scheme not in _SCHEMES:
            raise InvalidInputError(f"unknown scheme {self.scheme!r}; pick from {_SCHEMES}")
        if self.max_seed_attempts < 1:
            raise InvalidInputError("max_seed_attempts must be >= 1")
        if self.delta <= 0.0:
            raise InvalidInputError("delta must be positive")

    _KEY_MAP = {
        "n": "n",
        "alpha": "alpha",
        "preset": "preset",
        "delta_code": "delta_code",
        "epsilon": "epsilon",
        "M1": "m1_size",
        "M2": "m2_size",
        "seed": "seed",
        "scheme": "scheme",
        "max_seed_attempts": "max_seed_attempts",
        "delta": "delta",
        "dist": "dist",
        "dim_cap": "dim_cap",
    }

    @classmethod
    def from_dict(cls, raw: dict) -> "SimConfig":
        if not isinstance(raw, dict):
            raise InvalidInputError("simulation config must be a JSON object")
        unknown = set(raw) - set(cls._KEY_MAP)
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        if "n" not in raw:
            raise InvalidInputError("config requires 'n'")
        kwargs = {cls._KEY_MAP[k]: v for k, v in raw.items()}
        if kwargs.get("dist") is not None:
            kwargs["dist"] = tuple(float(x) for x in kwargs["dist"])
        return cls(**kwargs)


def _input_distribution(bc: BroadcastCQChannel, config: SimConfig) -> ProbabilityDistribution:
    if config.dist is None:
        return ProbabilityDistribution.uniform(bc.alphabet)
    if len(config.dist) != len(bc.alphabet):
        raise InvalidInputError("config dist length does not match the channel alphabet")
    return ProbabilityDistribution(bc.alphabet, np.asarray(config.dist))


def _sized_message_sets(config: SimConfig, chi1: float, chi2: float, notices: list):
    """Explicit sizes win; otherwise size from 2^(n (chi - 2 eps))."""
    n = config.n
    if config.m1_size is not None or config.m2_size is not None:
        if config.m1_size is None or config.m2_size is None:
            raise InvalidInputError("give both message sizes or neither")
        return int(config.m1_size), int(config.m2_size)
    eps = config.epsilon
    if eps is None:
        candidates = [(n * chi - 1.0) / (2.0 * n) for chi in (chi1, chi2)]
        eps = min(candidates)
        if eps <= 0.0:
            return 0, 0
        notices.append(f"epsilon defaulted to {eps:.6g} so both message sets reach size 2")
    sizes = [int(math.floor(2.0 ** (n * (chi - 2.0 * eps)))) for chi in (chi1, chi2)]
    return sizes[0], sizes[1]


def end_to_end_broadcast_sim(bc: BroadcastCQChannel, config: SimConfig | dict) -> dict:
    """Sample, detect, normalize, expurgate, and decode; returns a JSON-ready report."""
    if isinstance(config, dict):
        config = SimConfig.from_dict(config)
    dist = _input_distribution(bc, config)
    chi1 = holevo_chi(bc.marginal(1), dist)
    chi2 = holevo_chi(bc.marginal(2), dist)
    notices: list[str] = []
    report = {
        "scheme": config.scheme,
        "n": config.n,
        "alpha": config.alpha,
        "preset": config.preset,
        "delta_code": config.delta_code,
        "delta": config.delta,
        "chi1_bits": chi1,
        "chi2_bits": chi2,
        "input_weights": [float(w) for w in dist.weights],
        "notices": notices,
    }
    if config.scheme == "modular-sum":
        return _modular_sum_sim(bc, config, dist, chi1, chi2, report)
    return _proof_construction_sim(bc, config, dist, chi1, chi2, report)


def _proof_construction_sim(bc, config, dist, chi1, chi2, report):
    m1_size, m2_size = _sized_message_sets(config, chi1, chi2, report["notices"])
    if m1_size < 2 or m2_size < 2:
        report.update(
            status="infeasible",
            reason=f"message sizes ({m1_size}, {m2_size}) below 2 at n={config.n}",
        )
        return report
    report["sizes"] = {"sampled_m1": m1_size, "sampled_m2": m2_size}
    accepted = None
    attempts = 0
    for attempt in range(config.max_seed_attempts):
        attempts = attempt + 1
        seed_i = config.seed + attempt
        cb = sample_codebook(
            dist, config.n, m1_size, m2_size, config.delta_code, seed_i
        )
        detection = build_detection_operators(
            cb, bc, config.alpha, config.preset, config.dim_cap
        )
        decoder = build_square_root_decoder(detection)
        errs = average_errors(cb, bc, decoder, detection)
        if max(errs.overall[1], errs.overall[2]) <= config.delta:
            accepted = (seed_i, cb, detection, decoder, errs)
            break
    report["attempts_used"] = attempts
    if accepted is None:
        report.update(
            status="threshold-not-met",
            reason=f"no realization reached average error <= {config.delta} "
            f"within {config.max_seed_attempts} seeds",
            errors=errs.as_dict(),
            seed_last=seed_i,
        )
        return report
    seed_used, cb, detection, decoder, errs = accepted
    exp = expurgate(cb, decoder, errs, config.delta)
    decode_table = {}
    all_correct = True
    marg1, marg2 = bc.marginal(1), bc.marginal(2)
    for m1 in exp.m1_kept:
        for m2 in exp.m2_kept:
            w = cb.word(m1, m2)
            got1 = decode_with_side_info(decoder, 1, m2, marg1.word_state(w))
            got2 = decode_with_side_info(decoder, 2, m1, marg2.word_state(w))
            ok = got1 == m1 and got2 == m2
            all_correct = all_correct and ok
            decode_table[f"{m1},{m2}"] = {"receiver1": got1 == m1, "receiver2": got2 == m2}
    final1, final2 = len(exp.m1_kept), len(exp.m2_kept)
    report.update(
        status="ok",
        seed_used=seed_used,
        sizes={
            "sampled_m1": m1_size,
            "sampled_m2": m2_size,
            "final_m1": final1,
            "final_m2": final2,
        },
        rates={
            "sampled": [math.log2(m1_size) / config.n, math.log2(m2_size) / config.n],
            "final": [math.log2(final1) / config.n, math.log2(final2) / config.n],
        },
        errors=errs.as_dict(),
        expurgation=exp.as_dict(),
        subpovm_margins={
            "receiver1": {str(k): v for k, v in sorted(decoder.subpovm_margins[1].items())},
            "receiver2": {str(k): v for k, v in sorted(decoder.subpovm_margins[2].items())},
        },
        decode={"all_correct": all_correct, "table": decode_table},
    )
    return report


def _common_message_povm(channel, words, dist, alpha, preset, dim_cap):
    proj, dense_by_word, factor_by_word, _ = _sandwiched_detection(
        channel, words, dist, alpha, preset, dim_cap
    )
    dense = [dense_by_word[w] for w in words]
    factors = [factor_by_word[w] for w in words]
    return _normalize_group(dense, factors)


def _modular_sum_sim(bc, config, dist, chi1, chi2, report):
    if config.m1_size is not None and config.m2_size is not None:
        if config.m1_size != config.m2_size:
            raise InvalidInputError("the sum-forwarding scheme uses one common message size")
        size = int(config.m1_size)
    elif config.m1_size is not None or config.m2_size is not None:
        size = int(config.m1_size if config.m1_size is not None else config.m2_size)
    else:
        weak_chi = min(chi1, chi2)
        eps = config.epsilon if config.epsilon is not None else (config.n * weak_chi - 1.0) / (
            2.0 * config.n
        )
        if eps <= 0.0:
            report.update(status="infeasible", reason="weaker channel cannot fit 2 messages")
            return report
        size = int(math.floor(2.0 ** (config.n * (weak_chi - 2.0 * eps))))
    if size < 2:
        report.update(status="infeasible", reason=f"common message size {size} below 2")
        return report
    weaker = 1 if chi1 < chi2 else 2
    if chi1 < chi2:
        report["notices"].append(
            "receiver 1 is the weaker marginal; roles swapped relative to the usual order"
        )
    report["weaker_receiver"] = weaker
    report["sizes"] = {"common": size}

    marg1, marg2 = bc.marginal(1), bc.marginal(2)
    accepted = None
    attempts = 0
    for attempt in range(config.max_seed_attempts):
        attempts = attempt + 1
        seed_i = config.seed + attempt
        cb = sample_codebook(dist, config.n, size, 1, config.delta_code, seed_i)
        words = [cb.word(m, 0) for m in range(size)]
        povm1, margin1 = _common_message_povm(
            marg1, words, dist, config.alpha, config.preset, config.dim_cap
        )
        povm2, margin2 = _common_message_povm(
            marg2, words, dist, config.alpha, config.preset, config.dim_cap
        )
        errors1 = [
            _clamp01(1.0 - trace_pair(povm1[c], marg1.word_state(words[c])))
            for c in range(size)
        ]
        errors2 = [
            _clamp01(1.0 - trace_pair(povm2[c], marg2.word_state(words[c])))
            for c in range(size)
        ]
        avg1, avg2 = float(np.mean(errors1)), float(np.mean(errors2))
        if max(avg1, avg2) <= config.delta:
            accepted = (seed_i, words, povm1, povm2, errors1, errors2, margin1, margin2)
            break
    report["attempts_used"] = attempts
    if accepted is None:
        report.update(
            status="threshold-not-met",
            reason=f"no realization reached average error <= {config.delta} "
            f"within {config.max_seed_attempts} seeds",
            common_errors={"receiver1": errors1, "receiver2": errors2},
            seed_last=seed_i,
        )
        return report
    seed_used, words, povm1, povm2, errors1, errors2, margin1, margin2 = accepted

    decode_table = {}
    all_correct = True
    for m1 in range(size):
        for m2 in range(size):
            common = modular_sum_encode(m1, m2, size)
            state1 = marg1.word_state(words[common])
            state2 = marg2.word_state(words[common])
            got_common1 = int(np.argmax([_clamp01(trace_pair(op, state1)) for op in povm1]))
            got_common2 = int(np.argmax([_clamp01(trace_pair(op, state2)) for op in povm2]))
            ok1 = modular_sum_decode(got_common1, m2, size) == m1
            ok2 = modular_sum_decode(got_common2, m1, size) == m2
            all_correct = all_correct and ok1 and ok2
            decode_table[f"{m1},{m2}"] = {"receiver1": ok1, "receiver2": ok2}
    rate = math.log2(size) / config.n
    report.update(
        status="ok",
        seed_used=seed_used,
        rates={"sampled": [rate, rate], "final": [rate, rate]},
        common_errors={
            "receiver1": errors1,
            "receiver2": errors2,
            "avg_receiver1": float(np.mean(errors1)),
            "avg_receiver2": float(np.mean(errors2)),
        },
        subpovm_margins={"receiver1": margin1, "receiver2": margin2},
        decode={"all_correct": all_correct, "table": decode_table},
    )
    return report


# ---------------------------------------------------------------------------
# Two-sender average-error evaluator (experimental).
# ---------------------------------------------------------------------------


def mac_average_error(mac: MACCQChannel, words1, words2, povm) -> float:
    """Average decoding error of an externally supplied two-sender code.

    Experimental evaluator: words1/words2 map message indices to sender
    words, povm maps (m1, m2) to a decoding operator on the n-fold output
    space.  No code construction is attempted here.
    """
    words1 = {i: tuple(w) for i, w in (words1.items() if isinstance(words1, dict) else enumerate(words1))}
    words2 = {i: tuple(w) for i, w in (words2.items() if isinstance(words2, dict) else enumerate(words2))}
    if not words1 or not words2:
        raise InvalidInputError("both senders need at least one word")
    total = 0.0
    for m1, w1 in sorted(words1.items()):
        for m2, w2 in sorted(words2.items()):
            try:
                op = povm[(m1, m2)]
            except KeyError:
                raise InvalidInputError(f"povm misses the pair ({m1}, {m2})") from None
            state = mac.word_state(w1, w2)
            total += _clamp01(1.0 - trace_pair(op, state))
    return total / (len(words1) * len(words2))
