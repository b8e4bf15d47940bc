"""Dense linear algebra for small open quantum systems.

Conventions
-----------
* Units: hbar = k_B = gamma = 1. Times are dimensionless ``gamma * tau``.
* Vectorization is column stacking, ``vec(rho) = rho.flatten(order="F")``,
  so that ``A @ rho @ B`` corresponds to ``kron(B.T, A) @ vec(rho)``.
* Qubit basis: index 0 is the ground state, ``sigma_minus = |0><1|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
SYMMETRIZE_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((dim, dim), order="F")


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a @ rho."""
    a = np.asarray(a)
    return np.kron(np.eye(a.shape[0]), a)


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho @ b."""
    b = np.asarray(b)
    return np.kron(b.T, np.eye(b.shape[0]))


def sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a @ rho @ b."""
    return np.kron(np.asarray(b).T, np.asarray(a))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite state of a d-level system.

    Validation happens at construction; the stored array is read-only.
    """

    data: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.data)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {a.shape}")
        object.__setattr__(self, "data", _frozen(a))
        if self.validate:
            check_density_matrix(self.data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.data, dtype=dtype)

    @classmethod
    def pure(cls, psi: Sequence[complex]) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, dim: int, k: int) -> "DensityMatrix":
        rho = np.zeros((dim, dim), dtype=complex)
        rho[k, k] = 1.0
        return cls(rho)

    @classmethod
    def diagonal(cls, probs: Sequence[float]) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=complex)))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)


def check_density_matrix(rho: np.ndarray) -> None:
    """Raise ``ValueError`` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho)
    asym = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if asym > HERMITIAN_TOL:
        raise ValueError(f"density matrix is not Hermitian (max asymmetry {asym:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace {tr.real:.15g} differs from 1")
    min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if min_eig < -PSD_TOL:
        raise ValueError(f"density matrix has negative eigenvalue {min_eig:.3e}")


def as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.data
    return np.asarray(rho, dtype=complex)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Hermitian Hamiltonian in units of gamma."""

    data: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.data, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"Hamiltonian must be square, got shape {h.shape}")
        asym = np.max(np.abs(h - h.conj().T))
        if asym > HERMITIAN_TOL:
            raise ValueError(f"Hamiltonian is not Hermitian (max asymmetry {asym:.3e})")
        object.__setattr__(self, "data", _frozen(h))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def zero(cls, dim: int) -> "HamiltonianSpec":
        return cls(np.zeros((dim, dim)))


@dataclass(frozen=True)
class Superoperator:
    """A d^2 x d^2 matrix acting on column-stacked density matrices.

    ``kind`` is ``"generator"`` for Liouvillians and ``"propagator"`` for
    the channels ``exp(L tau)``.
    """

    matrix: np.ndarray
    kind: str = "generator"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"superoperator must be square, got shape {m.shape}")
        d = int(round(np.sqrt(m.shape[0])))
        if d * d != m.shape[0]:
            raise ValueError(f"superoperator size {m.shape[0]} is not a perfect square")
        if self.kind not in ("generator", "propagator"):
            raise ValueError(f"unknown superoperator kind {self.kind!r}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, rho) -> np.ndarray:
        """Raw action on a matrix; no validation of the result."""
        r = as_matrix(rho)
        if r.shape != (self.dim, self.dim):
            raise ValueError(f"operand has shape {r.shape}, expected {(self.dim, self.dim)}")
        return unvec(self.matrix @ vec(r), self.dim)

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        if not isinstance(other, Superoperator):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("cannot compose superoperators of different dimension")
        kind = "propagator" if self.kind == other.kind == "propagator" else "generator"
        return Superoperator(self.matrix @ other.matrix, kind)


def dissipator(L: np.ndarray) -> Superoperator:
    """Generator of ``D[L] rho = L rho L^dag - {L^dag L, rho} / 2``."""
    L = np.asarray(L, dtype=complex)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"jump operator must be square, got shape {L.shape}")
    LdL = L.conj().T @ L
    m = sprepost(L, L.conj().T) - 0.5 * spre(LdL) - 0.5 * spost(LdL)
    return Superoperator(m, "generator")


def liouvillian(H: HamiltonianSpec | np.ndarray | None,
                jumps: Iterable[tuple[float, np.ndarray]] = (),
                dim: int | None = None) -> Superoperator:
    """Lindblad generator ``-i[H, .] + sum_j rate_j D[L_j]``."""
    if H is not None and not isinstance(H, HamiltonianSpec):
        H = HamiltonianSpec(H)
    jumps = [(float(r), np.asarray(op, dtype=complex)) for r, op in jumps]
    if H is not None:
        dim = H.dim
    elif jumps:
        dim = jumps[0][1].shape[0]
    if dim is None:
        raise ValueError("cannot infer dimension: give H, jumps or dim")
    m = np.zeros((dim * dim, dim * dim), dtype=complex)
    if H is not None:
        m += -1j * (spre(H.data) - spost(H.data))
    for rate, op in jumps:
        if not np.isfinite(rate) or rate < 0:
            raise ValueError(f"jump rate must be a finite non-negative number, got {rate}")
        if op.shape != (dim, dim):
            raise ValueError(f"jump operator shape {op.shape} does not match dimension {dim}")
        m += rate * dissipator(op).matrix
    return Superoperator(m, "generator")


def expm_pade(a: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Pade exponential (scipy implementation)."""
    return scipy.linalg.expm(a)


def expm_eig(a: np.ndarray) -> np.ndarray:
    """Exponential through an eigendecomposition; for cross-checks only.

    Inaccurate for defective or badly conditioned matrices.
    """
    w, v = np.linalg.eig(a)
    return v @ np.diag(np.exp(w)) @ np.linalg.inv(v)


def propagate(gen: Superoperator, tau: float, method: str = "pade") -> Superoperator:
    """The channel ``exp(L tau)`` for a waiting time ``tau`` (units of 1/gamma)."""
    if gen.kind != "generator":
        raise ValueError("propagate expects a generator")
    tau = float(tau)
    if not np.isfinite(tau):
        raise ValueError(f"waiting time must be finite, got {tau}")
    if tau < 0:
        raise ValueError(f"waiting time must be non-negative, got {tau}")
    if tau == 0:
        return Superoperator(np.eye(gen.matrix.shape[0]), "propagator")
    if method == "pade":
        m = expm_pade(gen.matrix * tau)
    elif method == "eig":
        m = expm_eig(gen.matrix * tau)
    else:
        raise ValueError(f"unknown exponential method {method!r}")
    return Superoperator(m, "propagator")


def evolve(prop: Superoperator, rho) -> DensityMatrix:
    """Apply a propagator to a state, removing round-off anti-Hermitian drift.

    Raises ``ValueError`` if the drift exceeds ``SYMMETRIZE_TOL``, which
    points at a broken generator rather than round-off.
    """
    if prop.kind != "propagator":
        raise ValueError("evolve expects a propagator")
    out = prop.apply(rho)
    asym = np.max(np.abs(out - out.conj().T))
    if asym > SYMMETRIZE_TOL:
        raise ValueError(f"propagated state lost Hermiticity (asymmetry {asym:.3e})")
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out)


def spectrum(gen: Superoperator) -> np.ndarray:
    """Eigenvalues sorted by real part (descending), ties by imaginary part."""
    try:
        w = np.linalg.eigvals(gen.matrix)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed on superoperator: {exc}") from exc
    # round the sort keys so that numerically equal real parts tie properly
    order = np.lexsort((np.round(w.imag, 12), -np.round(w.real, 12)))
    return w[order]


def partial_trace(joint, dims: tuple[int, int], keep: int | str = 0) -> DensityMatrix:
    """Reduced state of a bipartite state on ``dims = (d_S, d_C)``.

    ``keep`` selects the subsystem: ``0``/``"S"`` or ``1``/``"C"``.
    """
    rho = as_matrix(joint)
    d_s, d_c = dims
    if d_s * d_c != rho.shape[0]:
        raise ValueError(f"dimension {rho.shape[0]} does not factor as {d_s}x{d_c}")
    keep = {"S": 0, "C": 1}.get(keep, keep)
    r = rho.reshape(d_s, d_c, d_s, d_c)
    if keep == 0:
        out = np.einsum("ajbj->ab", r)
    elif keep == 1:
        out = np.einsum("iaib->ab", r)
    else:
        raise ValueError(f"keep must be 0 or 1, got {keep!r}")
    return DensityMatrix(out)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Ginibre-distributed random state."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
