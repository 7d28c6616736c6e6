"""Dense linear algebra for finite-dimensional states and measurements.

Operators are plain complex numpy arrays.  Entropic quantities are in bits
(base-2 logarithms) with the convention 0*log(0) = 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import InvalidInputError

# Absolute tolerances for operator-level invariants.
HERMITIAN_ATOL = 1e-10
PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10
PROB_ATOL = 1e-12
SUBUNITAL_ATOL = 1e-10

# Dense realizations (tensor powers, projectors, decoders) refuse to build
# matrices beyond this total dimension.
DEFAULT_DIM_CAP = 4096

# Eigenvalues at or below this are treated as exact zeros of a state.
ZERO_EIGENVALUE_TOL = 1e-12


def as_square_matrix(mat, name: str = "matrix") -> np.ndarray:
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return m


def hermitian_part(mat: np.ndarray) -> np.ndarray:
    """(A + A†)/2, used to absorb roundoff before spectral routines."""
    return (mat + mat.conj().T) / 2


def hermitian_deviation(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0


def require_hermitian(mat, atol: float = HERMITIAN_ATOL, name: str = "matrix") -> np.ndarray:
    m = as_square_matrix(mat, name)
    dev = hermitian_deviation(m)
    if dev > atol:
        raise InvalidInputError(f"{name} is not Hermitian (max deviation {dev:.3e})")
    return m


def validate_density(rho, name: str = "state") -> np.ndarray:
    """Check Hermiticity, positivity and unit trace; returns the array."""
    m = require_hermitian(rho, name=name)
    w = np.linalg.eigvalsh(hermitian_part(m))
    if w.size and w[0] < -PSD_ATOL:
        raise InvalidInputError(f"{name} has negative eigenvalue {w[0]:.3e}")
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > TRACE_ATOL:
        raise InvalidInputError(f"{name} has trace {tr!r}, expected 1")
    return m


def validate_positive(mat, sub_unital: bool = False, name: str = "operator") -> np.ndarray:
    """Check Hermiticity and positivity; optionally the operator-norm bound <= 1."""
    m = require_hermitian(mat, name=name)
    w = np.linalg.eigvalsh(hermitian_part(m))
    if w.size and w[0] < -PSD_ATOL:
        raise InvalidInputError(f"{name} has negative eigenvalue {w[0]:.3e}")
    if sub_unital and w.size and w[-1] > 1.0 + SUBUNITAL_ATOL:
        raise InvalidInputError(f"{name} exceeds the identity (max eigenvalue {w[-1]!r})")
    return m


def hermitian_eigendecomposition(mat) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""
    m = require_hermitian(mat)
    w, u = np.linalg.eigh(hermitian_part(m))
    return w[::-1].copy(), u[:, ::-1].copy()


def tensor_product(a, b) -> np.ndarray:
    return np.kron(as_square_matrix(a, "left factor"), as_square_matrix(b, "right factor"))


def tensor_all(mats) -> np.ndarray:
    mats = list(mats)
    if not mats:
        raise InvalidInputError("tensor_all needs at least one factor")
    return reduce(np.kron, mats)


def partial_trace(mat, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one tensor factor of a bipartite operator.

    dims = (d1, d2) with d1*d2 matching the matrix; keep selects the
    surviving factor (1 or 2).
    """
    m = as_square_matrix(mat)
    d1, d2 = int(dims[0]), int(dims[1])
    if d1 < 1 or d2 < 1 or d1 * d2 != m.shape[0]:
        raise InvalidInputError(f"dims {dims} incompatible with matrix of size {m.shape[0]}")
    t = m.reshape(d1, d2, d1, d2)
    if keep == 1:
        return np.einsum("isjs->ij", t)
    if keep == 2:
        return np.einsum("sisj->ij", t)
    raise InvalidInputError(f"keep must be 1 or 2, got {keep!r}")


def trace_norm(mat) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    m = require_hermitian(mat)
    return float(np.abs(np.linalg.eigvalsh(hermitian_part(m))).sum())


def trace_pair(a: np.ndarray, b: np.ndarray) -> float:
    """Real part of tr(A B); intended for Hermitian pairs."""
    return float(np.einsum("ij,ji->", a, b).real)


def matrix_sqrt(mat) -> np.ndarray:
    m = validate_positive(mat, name="matrix_sqrt argument")
    w, u = np.linalg.eigh(hermitian_part(m))
    w = np.clip(w, 0.0, None)
    return hermitian_part((u * np.sqrt(w)) @ u.conj().T)


def pseudo_sqrt_inverse(mat, rel_tol: float = 1e-10) -> np.ndarray:
    """Inverse square root on the support; eigenvalues <= rel_tol * max are dropped."""
    m = validate_positive(mat, name="pseudo_sqrt_inverse argument")
    w, u = np.linalg.eigh(hermitian_part(m))
    wmax = float(w[-1]) if w.size else 0.0
    if wmax <= 0.0:
        return np.zeros_like(m)
    inv = np.where(w > rel_tol * wmax, 1.0 / np.sqrt(np.clip(w, rel_tol * wmax, None)), 0.0)
    return hermitian_part((u * inv) @ u.conj().T)


def support_projector(mat, rel_tol: float = 1e-10) -> np.ndarray:
    m = validate_positive(mat, name="support_projector argument")
    w, u = np.linalg.eigh(hermitian_part(m))
    wmax = float(w[-1]) if w.size else 0.0
    if wmax <= 0.0:
        return np.zeros_like(m)
    keep = np.where(w > rel_tol * wmax, 1.0, 0.0)
    return hermitian_part((u * keep) @ u.conj().T)


def spectrum_entropy_bits(eigenvalues: np.ndarray) -> float:
    """Shannon entropy in bits of a nonnegative spectrum summing to ~1."""
    w = np.asarray(eigenvalues, dtype=float)
    w = w[w > ZERO_EIGENVALUE_TOL]
    if w.size == 0:
        return 0.0
    return max(0.0, float(-(w * np.log2(w)).sum()))


def von_neumann_entropy(rho) -> float:
    """Entropy in bits of a density operator."""
    m = validate_density(rho)
    return spectrum_entropy_bits(np.linalg.eigvalsh(hermitian_part(m)))


@dataclass(frozen=True, eq=False)
class ProbabilityDistribution:
    """Discrete distribution over an ordered label alphabet."""

    labels: tuple
    weights: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise InvalidInputError("empty alphabet")
        if len(set(labels)) != len(labels):
            raise InvalidInputError("alphabet labels must be distinct")
        w = np.asarray(self.weights, dtype=float).copy()
        if w.ndim != 1 or w.size != len(labels):
            raise InvalidInputError("alphabet and weights must have matching length")
        if np.any(w < 0.0):
            raise InvalidInputError("negative probability weight")
        total = float(w.sum())
        if abs(total - 1.0) > PROB_ATOL:
            raise InvalidInputError(f"weights sum to {total!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, labels) -> "ProbabilityDistribution":
        labels = tuple(labels)
        if not labels:
            raise InvalidInputError("empty alphabet")
        return cls(labels, np.full(len(labels), 1.0 / len(labels)))

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidInputError(f"label {label!r} not in alphabet") from None

    def weight(self, label) -> float:
        return float(self.weights[self.index(label)])

    def support(self) -> tuple:
        return tuple(a for a, w in zip(self.labels, self.weights) if w > 0.0)

    def power(self, n: int) -> "ProbabilityDistribution":
        """Product distribution over length-n words (tuples of labels)."""
        if n < 1:
            raise InvalidInputError(f"power needs n >= 1, got {n}")
        labels = tuple(itertools.product(self.labels, repeat=n))
        weights = self.weights
        for _ in range(n - 1):
            weights = np.outer(weights, self.weights).ravel()
        return ProbabilityDistribution(labels, weights)


def multinomial_coefficient(n: int, counts) -> int:
    """Exact number of words with the given letter counts."""
    remaining = n
    out = 1
    for k in counts:
        if k < 0 or k > remaining:
            raise InvalidInputError(f"invalid count vector {tuple(counts)} for n={n}")
        out *= math.comb(remaining, k)
        remaining -= k
    if remaining != 0:
        raise InvalidInputError(f"count vector {tuple(counts)} does not sum to {n}")
    return out
