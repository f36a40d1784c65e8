"""Reduced density matrices, entropies and mutual information (in bits)."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import NumericalError, ValidationError
from .fock import SUBSYSTEMS, SectorSpace, StateVector, subsystem_index

EIG_CLAMP = 1e-12
NEG_EIG_TOL = 1e-10
MI_NEG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix over ``subsystems`` with local dimensions ``dims``.

    When ``space`` is set the matrix is expressed in that sector's basis;
    otherwise it acts on the tensor product of ``dims`` in row-major order.
    """

    matrix: np.ndarray
    subsystems: tuple[str, ...]
    dims: tuple[int, ...]
    space: SectorSpace | None = field(default=None, repr=False)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.matrix, self.matrix).real)

    def full_matrix(self) -> np.ndarray:
        """Matrix on the full tensor product of ``dims``."""
        if self.space is None:
            return self.matrix
        n = int(np.prod(self.dims))
        idx = self.space.full_indices
        out = np.zeros((n, n), dtype=np.complex128)
        out[np.ix_(idx, idx)] = self.matrix
        return out


def _norm_sq(psi) -> float:
    n = float(np.vdot(psi, psi).real)
    if n <= 0:
        raise ValidationError("state vector is zero")
    return n


def density(state: StateVector) -> DensityMatrix:
    """``|psi><psi| / <psi|psi>``.

    Integrated states carry a small norm drift that the timeline reports
    rather than removes; dividing by the norm here keeps the trace at one
    so entropies describe the physical state.
    """
    psi = state.amplitudes
    return DensityMatrix(np.outer(psi, psi.conj()) / _norm_sq(psi), SUBSYSTEMS,
                         state.space.subsystem_dims, state.space)


def _keep_positions(subsystems, keep):
    if isinstance(keep, str):
        keep = (keep,)
    keep = tuple(keep)
    if not keep:
        raise ValidationError("keep set must not be empty")
    for tag in keep:
        subsystem_index(tag)
        if tag not in subsystems:
            raise ValidationError(f"subsystem {tag!r} was already traced out")
    if len(set(keep)) != len(keep):
        raise ValidationError(f"duplicate subsystems in {keep!r}")
    # canonical order, whatever order the caller listed them in
    return sorted(subsystems.index(t) for t in keep)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out everything except ``keep`` by index contraction."""
    pos = _keep_positions(rho.subsystems, keep)
    dims = rho.dims
    r = len(dims)
    tensor = rho.full_matrix().reshape(dims + dims)
    row = list(range(r))
    col = [i + r if i in pos else i for i in range(r)]
    out_idx = pos + [p + r for p in pos]
    reduced = np.einsum(tensor, row + col, out_idx)
    d = int(np.prod([dims[p] for p in pos]))
    return DensityMatrix(reduced.reshape(d, d), tuple(rho.subsystems[p] for p in pos),
                         tuple(dims[p] for p in pos))


def reduced_density(state: StateVector, keep) -> DensityMatrix:
    """``partial_trace(density(state), keep)`` without forming the full ``rho``."""
    pos = _keep_positions(SUBSYSTEMS, keep)
    dims = state.space.subsystem_dims
    psi = state.space.embed(state.amplitudes)
    rest = [i for i in range(len(dims)) if i not in pos]
    mat = np.transpose(psi, pos + rest).reshape(int(np.prod([dims[p] for p in pos])), -1)
    return DensityMatrix(mat @ mat.conj().T / _norm_sq(state.amplitudes),
                         tuple(SUBSYSTEMS[p] for p in pos),
                         tuple(dims[p] for p in pos))


def _spectrum(rho) -> np.ndarray:
    m = getattr(rho, "matrix", rho)
    m = np.asarray(m, dtype=np.complex128)
    if m.size and np.abs(m - m.conj().T).max() > 1e-10:
        raise NumericalError("density matrix is not Hermitian")
    try:
        p = np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    if p.size and p.min() < -NEG_EIG_TOL:
        raise NumericalError(f"density matrix has eigenvalue {p.min()!r} < 0")
    return np.clip(p, 0.0, None)


def vn_entropy(rho) -> float:
    """``-Tr(rho log2 rho)``; eigenvalues below 1e-12 contribute nothing."""
    p = _spectrum(rho)
    p = p[p > EIG_CLAMP]
    s = float(-np.sum(p * np.log2(p)))
    return abs(s) if s == 0 else s


def renyi_entropy(rho, alpha: float) -> float:
    """``log2(Tr rho^alpha) / (1 - alpha)``."""
    if alpha <= 0:
        raise ValidationError(f"alpha must be > 0, got {alpha!r}")
    if abs(alpha - 1) <= 1e-9:
        raise ValidationError("alpha too close to 1; use vn_entropy")
    p = _spectrum(rho)
    p = p[p > EIG_CLAMP]
    s = float(np.log2(np.sum(p**alpha)) / (1 - alpha))
    return abs(s) if s == 0 else s


def _group(x):
    return (x,) if isinstance(x, str) else tuple(x)


def mutual_information(state: StateVector, m, n) -> float:
    """``S(m) + S(n) - S(mn)``; ``m`` and ``n`` are ids or disjoint groups of ids."""
    gm, gn = _group(m), _group(n)
    if set(gm) & set(gn):
        raise ValidationError(f"subsystems {gm!r} and {gn!r} overlap")
    val = (vn_entropy(reduced_density(state, gm)) + vn_entropy(reduced_density(state, gn))
           - vn_entropy(reduced_density(state, gm + gn)))
    if val < -MI_NEG_TOL:
        raise NumericalError(f"mutual information {val!r} < 0: partial trace is inconsistent")
    return val


def complement(keep) -> tuple[str, ...]:
    keep = set(_group(keep))
    return tuple(s for s in SUBSYSTEMS if s not in keep)


@dataclass(frozen=True)
class EntropyRecord:
    time: float
    entropy: dict  # id -> S in bits
    mutual: dict  # (id, id) in canonical order -> I in bits
    witness: dict  # (id, id) -> True where S(mn) < max(S(m), S(n))


def _pair_key(m, n):
    a, b = sorted((m, n), key=SUBSYSTEMS.index)
    return (a, b)


def all_pairs() -> list[tuple[str, str]]:
    return list(combinations(SUBSYSTEMS, 2))


def entropy_record(time, state: StateVector, subsystems=SUBSYSTEMS, pairs=()) -> EntropyRecord:
    cache = {}

    def S(group):
        key = tuple(sorted(group, key=SUBSYSTEMS.index))
        if key not in cache:
            cache[key] = vn_entropy(reduced_density(state, key))
        return cache[key]

    ent = {s: S((s,)) for s in subsystems}
    mutual, witness = {}, {}
    for m, n in pairs:
        key = _pair_key(m, n)
        if m == n:
            raise ValidationError(f"pair ({m}, {n}) repeats a subsystem")
        sm, sn, smn = S((m,)), S((n,)), S((m, n))
        val = sm + sn - smn
        if val < -MI_NEG_TOL:
            raise NumericalError(f"mutual information {val!r} < 0 at t={time!r}")
        mutual[key] = val
        witness[key] = smn < max(sm, sn) - MI_NEG_TOL
    return EntropyRecord(float(time), ent, mutual, witness)


def entropy_timeline(timeline, subsystems=SUBSYSTEMS, pairs=(), every: int = 1) -> list[EntropyRecord]:
    """One record per (``every``-th) sample of a ``Timeline``."""
    for s in subsystems:
        subsystem_index(s)
    for pair in pairs:
        for s in pair:
            subsystem_index(s)
    records = []
    for i in range(0, len(timeline), every):
        t = timeline.times[i]
        try:
            records.append(entropy_record(t, timeline.state(i), subsystems, pairs))
        except NumericalError as exc:
            raise NumericalError(f"at t={t!r} ns: {exc}") from exc
    return records
