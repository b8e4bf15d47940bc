"""Measurements and the measure-then-evolve step.

A ``ProjectiveBasis`` stores its vectors as the columns of a unitary. A
``POVM`` stores effects ``M_w`` and uses the PSD square root as the
measurement operator ``L_w``, so ``collapse`` is well defined.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qcore import DensityMatrix, Superoperator, as_matrix, evolve, propagate

EPS_P = 1e-12
GRAM_TOL = 1e-12
POVM_TOL = 1e-10


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


@dataclass(frozen=True)
class ProjectiveBasis:
    """Orthonormal basis ``{|k>}``; ``vectors[:, k]`` is ``|k>``."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"basis must be a square matrix of column vectors, got {v.shape}")
        err = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0])))
        if err > GRAM_TOL:
            raise ValueError(f"basis vectors are not orthonormal (Gram error {err:.3e})")
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.dim

    def projector(self, k: int) -> np.ndarray:
        psi = self.vectors[:, k]
        return np.outer(psi, psi.conj())

    @property
    def effects(self) -> list[np.ndarray]:
        return [self.projector(k) for k in range(self.dim)]

    @classmethod
    def computational(cls, dim: int) -> "ProjectiveBasis":
        return cls(np.eye(dim))

    @classmethod
    def bloch(cls, theta: float, phi: float) -> "ProjectiveBasis":
        """Qubit basis along the Bloch direction (theta, phi).

        Outcome 0 is ``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``;
        ``(0, 0)`` is the computational basis, ``(pi/2, 0)`` the sigma_x
        eigenbasis and ``(pi/2, pi/2)`` the sigma_y eigenbasis.
        """
        up = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
        down = np.array([-np.exp(-1j * phi) * np.sin(theta / 2), np.cos(theta / 2)])
        return cls(np.column_stack([up, down]))


@dataclass(frozen=True)
class POVM:
    """Generalized measurement given by effects ``M_w >= 0`` summing to I."""

    effects: tuple

    def __post_init__(self):
        effs = []
        for m in self.effects:
            m = np.array(m, dtype=complex, copy=True)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"POVM effect must be square, got shape {m.shape}")
            if np.max(np.abs(m - m.conj().T)) > POVM_TOL:
                raise ValueError("POVM effect is not Hermitian")
            if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -POVM_TOL:
                raise ValueError("POVM effect is not positive semidefinite")
            m.flags.writeable = False
            effs.append(m)
        if not effs:
            raise ValueError("POVM needs at least one effect")
        dims = {m.shape[0] for m in effs}
        if len(dims) != 1:
            raise ValueError(f"POVM effects have mismatched dimensions {sorted(dims)}")
        total = sum(effs)
        err = np.max(np.abs(total - np.eye(total.shape[0])))
        if err > POVM_TOL:
            raise ValueError(f"POVM effects do not sum to identity (error {err:.3e})")
        object.__setattr__(self, "effects", tuple(effs))

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def kraus(self, w: int) -> np.ndarray:
        return _psd_sqrt(self.effects[w])

    @classmethod
    def from_projective(cls, basis: ProjectiveBasis) -> "POVM":
        return cls(tuple(basis.effects))


Measurement = ProjectiveBasis | POVM


def _check_dim(rho: np.ndarray, m: Measurement) -> None:
    if rho.shape != (m.dim, m.dim):
        raise ValueError(f"state of shape {rho.shape} does not match measurement dimension {m.dim}")


def outcome_probabilities(rho, m: Measurement) -> np.ndarray:
    """``p(w | rho) = Tr(rho M_w)``, clipped of round-off negatives."""
    r = as_matrix(rho)
    _check_dim(r, m)
    if isinstance(m, ProjectiveBasis):
        v = m.vectors
        p = np.einsum("ik,ij,jk->k", v.conj(), r, v).real
    else:
        p = np.array([np.trace(r @ e).real for e in m.effects])
    if np.any(p < -EPS_P):
        raise ValueError(f"negative outcome probability {p.min():.3e}; invalid state")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def collapse(rho, m: Measurement, omega: int, eps_p: float = EPS_P) -> DensityMatrix:
    """Post-measurement state ``L_w rho L_w^dag / p(w|rho)``."""
    r = as_matrix(rho)
    _check_dim(r, m)
    if not 0 <= omega < m.n_outcomes:
        raise IndexError(f"outcome {omega} out of range for {m.n_outcomes} outcomes")
    p = outcome_probabilities(r, m)[omega]
    if p <= eps_p:
        raise ValueError(f"outcome {omega} has probability {p:.3e} <= {eps_p:g}; cannot collapse")
    if isinstance(m, ProjectiveBasis):
        return DensityMatrix(m.projector(omega))
    L = m.kraus(omega)
    out = L @ r @ L.conj().T / p
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out / np.trace(out).real)


@dataclass(frozen=True)
class MeasureEvolveStep:
    """One measure-then-evolve iteration with outcome-dependent channels.

    ``propagators[w]`` is applied after outcome ``w``; ``waiting_times[w]``
    records the corresponding gamma*tau (feedback when they differ).
    """

    measurement: Measurement
    propagators: tuple
    waiting_times: tuple

    def __post_init__(self):
        n = self.measurement.n_outcomes
        if len(self.propagators) != n:
            raise ValueError(f"need one propagator per outcome ({n}), got {len(self.propagators)}")
        if len(self.waiting_times) != n:
            raise ValueError(f"need one waiting time per outcome ({n}), got {len(self.waiting_times)}")
        for p in self.propagators:
            if not isinstance(p, Superoperator) or p.kind != "propagator":
                raise TypeError("propagators must be Superoperator(kind='propagator')")
            if p.dim != self.measurement.dim:
                raise ValueError("propagator dimension does not match measurement")
        taus = tuple(float(t) for t in self.waiting_times)
        if any(not np.isfinite(t) or t < 0 for t in taus):
            raise ValueError(f"waiting times must be finite and non-negative, got {taus}")
        object.__setattr__(self, "propagators", tuple(self.propagators))
        object.__setattr__(self, "waiting_times", taus)

    @classmethod
    def from_generator(cls, measurement: Measurement, gen: Superoperator,
                       taus: float | Sequence[float]) -> "MeasureEvolveStep":
        n = measurement.n_outcomes
        if np.ndim(taus) == 0:
            taus = [float(taus)] * n
        taus = [float(t) for t in taus]
        cache: dict[float, Superoperator] = {}
        props = []
        for t in taus:
            if t not in cache:
                cache[t] = propagate(gen, t)
            props.append(cache[t])
        return cls(measurement, tuple(props), tuple(taus))


def step(rho, s: MeasureEvolveStep, omega: int) -> DensityMatrix:
    """Collapse on outcome ``omega`` then apply that outcome's channel."""
    post = collapse(rho, s.measurement, omega)
    return evolve(s.propagators[omega], post)


def collision_povm(U: np.ndarray, rho_c, aux_basis: ProjectiveBasis,
                   dims: tuple[int, int] | None = None) -> POVM:
    """System POVM induced by a collision with an auxiliary unit.

    The joint space is ordered system (x) auxiliary. With
    ``rho_c = sum_j p_j |p_j><p_j|`` the effects are
    ``E_i = sum_j F_ij^dag F_ij`` where ``F_ij = sqrt(p_j) <i|U|p_j>``.
    """
    U = np.asarray(U, dtype=complex)
    rc = as_matrix(rho_c)
    d_c = rc.shape[0]
    if aux_basis.dim != d_c:
        raise ValueError("auxiliary basis dimension does not match rho_c")
    if dims is None:
        if U.shape[0] % d_c:
            raise ValueError(f"unitary of size {U.shape[0]} not divisible by d_C={d_c}")
        dims = (U.shape[0] // d_c, d_c)
    d_s, d_c2 = dims
    if d_c2 != d_c or U.shape != (d_s * d_c, d_s * d_c):
        raise ValueError(f"unitary shape {U.shape} does not match dims {dims}")
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if err > 1e-10:
        raise ValueError(f"interaction is not unitary (error {err:.3e})")
    DensityMatrix(rc)

    w, v = np.linalg.eigh(0.5 * (rc + rc.conj().T))
    w = np.clip(w, 0.0, None)
    u4 = U.reshape(d_s, d_c, d_s, d_c)
    effects = []
    for i in range(d_c):
        a_i = aux_basis.vectors[:, i]
        E = np.zeros((d_s, d_s), dtype=complex)
        for j in range(d_c):
            if w[j] == 0.0:
                continue
            F = np.sqrt(w[j]) * np.einsum("c,scte,e->st", a_i.conj(), u4, v[:, j])
            E += F.conj().T @ F
        effects.append(0.5 * (E + E.conj().T))
    return POVM(tuple(effects))
