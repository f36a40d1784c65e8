"""Hamiltonian assembly, the nonlinear coupling schedule and its plateaus.

All frequencies and couplings are angular, in rad/ns; times are in ns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Literal, NamedTuple

import numpy as np

from .errors import NoPlateauError, ValidationError
from .fock import EmbeddedOperator, SectorSpace, full_space_operator, project

#: 10 GHz cavity, as angular frequency in rad/ns.
OMEGA_DEFAULT = 10 * 2 * math.pi


@dataclass(frozen=True)
class SystemParams:
    omega_a1: float
    omega_a2: float
    omega_c1: float
    omega_c2: float
    omega_b: float
    lambda1: float
    lambda2: float
    J: float

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not math.isfinite(val):
                raise ValidationError(f"parameter {name} must be finite, got {val!r}")
        for name in ("lambda1", "lambda2", "J"):
            if getattr(self, name) < 0:
                raise ValidationError(f"coupling {name} must be >= 0")

    @property
    def delta(self) -> float:
        """Qubit-cavity detuning of the first pair, ``omega_a1 - omega_c1``."""
        return self.omega_a1 - self.omega_c1

    @classmethod
    def resonant(cls, omega: float, lambda_: float, J: float, delta: float = 0.0) -> "SystemParams":
        """Uniform configuration: cavities at ``omega``, pump at ``2 omega``,
        both qubits at ``omega + delta``."""
        return cls(
            omega_a1=omega + delta, omega_a2=omega + delta,
            omega_c1=omega, omega_c2=omega, omega_b=2 * omega,
            lambda1=lambda_, lambda2=lambda_, J=J,
        )

    @classmethod
    def from_ratios(cls, omega=OMEGA_DEFAULT, lambda_ratio=0.1, J_ratio=0.05, delta_ratio=0.0):
        lam = lambda_ratio * omega
        return cls.resonant(omega, lam, J_ratio * lam, delta_ratio * lam)

    def with_delta(self, delta: float) -> "SystemParams":
        """Move both qubit frequencies; cavities and pump stay put."""
        return replace(self, omega_a1=self.omega_c1 + delta, omega_a2=self.omega_c2 + delta)


@dataclass(frozen=True)
class CouplingSchedule:
    """``k(t) = k0`` (constant) or ``k0 * (1 + sin(Omega t))`` (harmonic)."""

    kind: Literal["constant", "harmonic"] = "harmonic"
    k0: float = 0.01 * OMEGA_DEFAULT
    Omega: float = 0.004444

    def __post_init__(self):
        if self.kind not in ("constant", "harmonic"):
            raise ValidationError(f"unknown schedule kind {self.kind!r}")
        if not (math.isfinite(self.k0) and math.isfinite(self.Omega)):
            raise ValidationError("k0 and Omega must be finite")
        if self.k0 < 0:
            raise ValidationError(f"k0 must be >= 0, got {self.k0!r}")

    @property
    def amplitude(self) -> float:
        """Coefficient of the sine term (0 for constant schedules)."""
        return 1.0 if self.kind == "harmonic" else 0.0


def k_of_t(sched: CouplingSchedule, t):
    """Nonlinear coupling at time ``t`` (scalar or array)."""
    if sched.kind == "constant":
        return sched.k0 if np.ndim(t) == 0 else np.full(np.shape(t), sched.k0)
    return sched.k0 * (1.0 + np.sin(sched.Omega * np.asarray(t, dtype=float)))


class PlateauWindow(NamedTuple):
    t_enter: float
    t_zero: float
    t_exit: float


def plateau_window(sched: CouplingSchedule, fraction: float = 0.1, cycle: int = 0) -> PlateauWindow:
    """Times around the ``cycle``-th zero of ``k`` where ``k = fraction * k0``.

    ``k`` descends through ``fraction * k0`` at ``t_enter``, vanishes at
    ``t_zero`` and climbs back at ``t_exit``.
    """
    if sched.kind != "harmonic" or sched.Omega == 0:
        raise NoPlateauError("constant coupling never vanishes; no plateau window exists")
    if sched.Omega < 0:
        raise ValidationError("Omega must be positive for a plateau window")
    if not 0 < fraction <= 1:
        raise ValidationError(f"fraction must lie in (0, 1], got {fraction!r}")
    if cycle < 0:
        raise ValidationError("cycle must be >= 0")
    # sin(Omega t) = fraction - 1 on the descending and ascending flanks
    a = math.asin(1.0 - fraction)
    shift = 2 * math.pi * cycle
    om = sched.Omega
    return PlateauWindow(
        (math.pi + a + shift) / om,
        (1.5 * math.pi + shift) / om,
        (2 * math.pi - a + shift) / om,
    )


@dataclass(frozen=True, eq=False)
class HamiltonianSplit:
    """``H(k) = static + k * coupling`` on one space.

    ``coupling`` is the bare ``(i/2)[(a1^dag)^2 b - a1^2 b^dag]``; the pump
    energy ``omega_b b^dag b`` sits in ``static``.
    """

    space: SectorSpace
    static: np.ndarray
    coupling: np.ndarray

    def at(self, k: float) -> EmbeddedOperator:
        if not math.isfinite(k):
            raise ValidationError(f"coupling k must be finite, got {k!r}")
        return EmbeddedOperator(self.static + k * self.coupling, hermitian=True)


@lru_cache(maxsize=16)
def _full_ops(dims):
    op = lambda which, kind: full_space_operator(dims, which, kind)  # noqa: E731
    a1, a2, b = op("f1", "annihilate"), op("f2", "annihilate"), op("fb", "annihilate")
    return {
        "sz1": op("q1", "sigma_z"), "sz2": op("q2", "sigma_z"),
        "sm1": op("q1", "sigma_minus"), "sm2": op("q2", "sigma_minus"),
        "n1": op("f1", "number"), "n2": op("f2", "number"), "nb": op("fb", "number"),
        "a1": a1, "a2": a2, "b": b,
    }


def full_hamiltonian_terms(dims, params: SystemParams):
    """Static and k-linear parts on the full tensor product, as dense arrays."""
    o = _full_ops(tuple(dims))
    a1, a2, b = o["a1"], o["a2"], o["b"]
    hop = a1.T @ a2
    jc1 = a1.T @ o["sm1"]
    jc2 = a2.T @ o["sm2"]
    static = (
        0.5 * params.omega_a1 * o["sz1"] + params.omega_c1 * o["n1"]
        + 0.5 * params.omega_a2 * o["sz2"] + params.omega_c2 * o["n2"]
        + params.omega_b * o["nb"]
        + params.J * (hop + hop.T)
        + params.lambda1 * (jc1 + jc1.T)
        + params.lambda2 * (jc2 + jc2.T)
    ).astype(np.complex128)
    pump = a1.T @ a1.T @ b
    coupling = 0.5j * (pump - pump.T)
    return static, coupling


def hamiltonian_split(space: SectorSpace, params: SystemParams) -> HamiltonianSplit:
    static, coupling = full_hamiltonian_terms(space.subsystem_dims, params)
    if not space.is_full:
        static, coupling = project(space, static), project(space, coupling)
    return HamiltonianSplit(space, static, coupling)


def assemble_h(space: SectorSpace, params: SystemParams, k_now: float) -> EmbeddedOperator:
    """``H0 + HI + Hk`` at coupling ``k_now`` on ``space``."""
    return hamiltonian_split(space, params).at(k_now)


def excitation_operator(space: SectorSpace) -> EmbeddedOperator:
    """Diagonal weighted excitation count ``n1 + n2 + 2 nb + q1 + q2``."""
    occ = space.occupations
    diag = occ[:, 0] + occ[:, 1] + 2 * occ[:, 2] + occ[:, 3] + occ[:, 4]
    return EmbeddedOperator(np.diag(diag.astype(np.complex128)), hermitian=True)
