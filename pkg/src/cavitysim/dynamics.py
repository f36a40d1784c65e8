"""Time evolution under ``H(t)``, observables and parameter sweeps."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _dop853
from .errors import IntegrationError, SweepError, ValidationError
from .fock import QUBITS, SectorSpace, StateVector, subsystem_index, subsystem_operator
from .hamiltonian import CouplingSchedule, HamiltonianSplit, SystemParams, hamiltonian_split

DRIFT_ABORT = 1e-6
SWEEP_AXES = ("k0", "delta", "Omega")


def default_sample_times(t_max: float = 2000.0, dt_out: float = 1.0) -> np.ndarray:
    n = int(round(t_max / dt_out))
    return np.arange(n + 1) * dt_out


@dataclass(frozen=True, eq=False)
class IntegratorConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_step: float = math.inf
    sample_times: np.ndarray = field(default_factory=default_sample_times)

    def __post_init__(self):
        times = np.asarray(self.sample_times, dtype=float)
        object.__setattr__(self, "sample_times", times)
        if times.ndim != 1 or times.size == 0:
            raise ValidationError("sample_times must be a non-empty 1-D sequence")
        if times[0] != 0.0:
            raise ValidationError("sample_times must start at 0")
        if np.any(np.diff(times) <= 0):
            raise ValidationError("sample_times must be strictly increasing")
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise ValidationError("tolerances and max_step must be positive")


@dataclass(frozen=True, eq=False)
class Timeline:
    times: np.ndarray
    amplitudes: np.ndarray  # n_samples x dim
    space: SectorSpace
    n_steps: int = 0

    @property
    def norm_drift(self) -> np.ndarray:
        return np.abs(np.linalg.norm(self.amplitudes, axis=1) - 1.0)

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> StateVector:
        return StateVector(self.amplitudes[i], self.space, check=False)

    @property
    def states(self) -> list[StateVector]:
        return [self.state(i) for i in range(len(self))]

    def expect(self, op) -> np.ndarray:
        """``<psi(t)|op|psi(t)>`` at every sample (no renormalisation)."""
        m = getattr(op, "matrix", op)
        vals = np.einsum("ti,ij,tj->t", self.amplitudes.conj(), m, self.amplitudes)
        return vals

    def sigma_z(self, which: str) -> np.ndarray:
        _check_qubit(which)
        diag = subsystem_operator(self.space, which, "sigma_z").matrix.diagonal().real
        return (np.abs(self.amplitudes) ** 2) @ diag

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _check_qubit(which):
    subsystem_index(which)
    if which not in QUBITS:
        raise ValidationError(f"{which!r} is not a qubit")


def sigma_z_expect(state: StateVector, which: str) -> float:
    """Population inversion of one qubit."""
    _check_qubit(which)
    m = subsystem_operator(state.space, which, "sigma_z").matrix
    val = np.vdot(state.amplitudes, m @ state.amplitudes)
    if abs(val.imag) > 1e-12:
        raise ValidationError(f"<sigma_z> has imaginary part {val.imag!r}")
    return float(val.real)


def propagate(split: HamiltonianSplit, sched: CouplingSchedule, psi0, times,
              rel_tol=1e-12, abs_tol=1e-14, max_step=math.inf) -> tuple[np.ndarray, int]:
    """Integrate ``i dpsi/dt = H(t) psi`` from ``times[0]`` through ``times``.

    ``times`` may run backwards. The mean diagonal energy is removed as a
    global phase during integration and restored on output, which keeps
    the stepper from resolving the ~omega carrier that no observable sees.
    """
    times = np.ascontiguousarray(times, dtype=float)
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    n = psi0.shape[0]
    offset = float(np.mean(split.static.diagonal().real)) if n else 0.0
    static = -1j * (split.static - offset * np.eye(n))
    coupling = -1j * split.coupling
    out = np.empty((times.size, n), dtype=np.complex128)
    status, index, t_fail, n_steps, _ = _dop853.integrate(
        np.ascontiguousarray(static), np.ascontiguousarray(coupling),
        float(sched.k0), sched.amplitude, float(sched.Omega),
        psi0, times, float(rel_tol), float(abs_tol), float(max_step), DRIFT_ABORT, out,
    )
    if status == _dop853.STATUS_STEP_UNDERFLOW:
        raise IntegrationError("step size underflow", t_fail)
    if status == _dop853.STATUS_NORM_DRIFT:
        drift = abs(np.linalg.norm(out[index]) - 1.0)
        raise IntegrationError(f"norm drift {drift:.3e} exceeds {DRIFT_ABORT:g}", t_fail)
    phase = np.exp(-1j * offset * (times - times[0]))
    return out * phase[:, None], n_steps


def evolve(space: SectorSpace, params: SystemParams, sched: CouplingSchedule,
           psi0: StateVector, cfg: IntegratorConfig | None = None) -> Timeline:
    """Schrödinger evolution sampled at ``cfg.sample_times``."""
    cfg = cfg or IntegratorConfig()
    if psi0.space is not space and psi0.space.labels != space.labels:
        raise ValidationError("initial state lives on a different space")
    if abs(psi0.norm - 1.0) > 1e-9:
        raise ValidationError("initial state must be normalised")
    split = hamiltonian_split(space, params)
    amps, n_steps = propagate(
        split, sched, psi0.amplitudes, cfg.sample_times, cfg.rel_tol, cfg.abs_tol, cfg.max_step
    )
    return Timeline(cfg.sample_times, amps, space, n_steps)


@dataclass(frozen=True, eq=False)
class SweepResult:
    axis: str
    axis_values: np.ndarray
    times: np.ndarray
    sz_q1: np.ndarray  # n_values x n_times
    sz_q2: np.ndarray
    failures: dict = field(default_factory=dict)

    def trace(self, which: str) -> np.ndarray:
        return {"q1": self.sz_q1, "q2": self.sz_q2}[which]


def sweep_point(params: SystemParams, sched: CouplingSchedule, axis: str, value: float):
    """Parameters and schedule for one grid point of a sweep."""
    if axis == "k0":
        return params, replace(sched, k0=value)
    if axis == "delta":
        return params.with_delta(value), sched
    if axis == "Omega":
        return params, replace(sched, kind="harmonic", Omega=value)
    raise ValidationError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")


def sweep(space, base_params, sched, psi0, cfg, axis, values, workers=None, raise_on_error=True):
    """One ``evolve`` per axis value, rows kept in the given order.

    Trajectories run on a thread pool (the integrator releases the GIL).
    Failed points become NaN rows listed in ``failures``; with
    ``raise_on_error`` a ``SweepError`` carrying the partial result follows
    once every point has finished.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValidationError("sweep needs a non-empty list of values")
    if not np.all(np.isfinite(values)):
        raise ValidationError("sweep values must be finite")
    points = [sweep_point(base_params, sched, axis, v) for v in values]
    cfg = cfg or IntegratorConfig()

    def run(point):
        p, s = point
        try:
            tl = evolve(space, p, s, psi0, cfg)
        except (IntegrationError, ValidationError) as exc:
            return exc
        return tl.sigma_z("q1"), tl.sigma_z("q2")

    if workers == 1 or len(points) == 1:
        outcomes = [run(pt) for pt in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, points))

    n_t = cfg.sample_times.size
    sz1 = np.full((values.size, n_t), np.nan)
    sz2 = np.full((values.size, n_t), np.nan)
    failures = {}
    for i, (v, res) in enumerate(zip(values, outcomes)):
        if isinstance(res, Exception):
            failures[float(v)] = str(res)
        else:
            sz1[i], sz2[i] = res
    result = SweepResult(axis, values, cfg.sample_times, sz1, sz2, failures)
    if failures and raise_on_error:
        raise SweepError(failures, result)
    return result
