"""Truncated Fock bases for two qubit-cavity pairs plus a pump mode.

Every basis ket is ``|q1, n1, nb, q2, n2>``: qubit 1, cavity 1, the
down-conversion pump mode, qubit 2, cavity 2. A pump photon carries two
units of excitation, so the weighted count ``q1 + n1 + 2*nb + q2 + n2`` is
conserved by the full Hamiltonian and each value of it labels a sector.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import EmptySectorError, StateParseError, ValidationError

SUBSYSTEMS = ("q1", "f1", "fb", "q2", "f2")
QUBITS = ("q1", "q2")
FIELDS = ("f1", "fb", "f2")
EXCITATION_WEIGHTS = (1, 1, 2, 1, 1)

BOSONIC_KINDS = ("annihilate", "create", "number")
QUBIT_KINDS = ("sigma_z", "sigma_plus", "sigma_minus")


class OccupationLabel(NamedTuple):
    q1: int
    n1: int
    nb: int
    q2: int
    n2: int

    @property
    def excitation(self) -> int:
        return sum(w * v for w, v in zip(EXCITATION_WEIGHTS, self))

    def ket(self) -> str:
        return "|" + "".join(str(v) for v in self) + ">"


def subsystem_index(which: str) -> int:
    try:
        return SUBSYSTEMS.index(which)
    except ValueError:
        raise ValidationError(
            f"unknown subsystem {which!r}; expected one of {', '.join(SUBSYSTEMS)}"
        ) from None


@dataclass(frozen=True, eq=False)
class SectorSpace:
    """Ordered basis of kets, either one excitation sector or the full space.

    ``excitation_number`` is ``None`` for the full truncated tensor product.
    Labels are in lexicographic order, which for the full space coincides
    with row-major indexing of the tensor of shape ``subsystem_dims``.
    """

    labels: tuple[OccupationLabel, ...]
    cutoff_c: int
    cutoff_b: int
    excitation_number: int | None
    index_of: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index_of", {lab: i for i, lab in enumerate(self.labels)})

    @property
    def subsystem_dims(self) -> tuple[int, ...]:
        c, b = self.cutoff_c + 1, self.cutoff_b + 1
        return (2, c, b, 2, c)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def is_full(self) -> bool:
        return self.excitation_number is None

    @cached_property
    def full_indices(self) -> np.ndarray:
        """Flat positions of this basis inside the full tensor product."""
        if not self.labels:
            return np.zeros(0, dtype=np.intp)
        return np.ravel_multi_index(np.array(self.labels).T, self.subsystem_dims)

    @cached_property
    def occupations(self) -> np.ndarray:
        """``dim x 5`` integer array of the labels."""
        return np.array(self.labels, dtype=np.int64).reshape(-1, 5)

    def embed(self, vec) -> np.ndarray:
        """Place sector amplitudes into the full tensor (zero elsewhere)."""
        full = np.zeros(int(np.prod(self.subsystem_dims)), dtype=np.complex128)
        full[self.full_indices] = vec
        return full.reshape(self.subsystem_dims)

    def full_space(self) -> "SectorSpace":
        return build_full_space(self.cutoff_c, self.cutoff_b)

    def __repr__(self):
        return (
            f"SectorSpace(cutoff_c={self.cutoff_c}, cutoff_b={self.cutoff_b}, "
            f"N={self.excitation_number}, dim={self.dim})"
        )


def _check_cutoffs(cutoff_c, cutoff_b):
    if cutoff_c < 0 or cutoff_b < 0:
        raise ValidationError(f"cutoffs must be >= 0, got ({cutoff_c}, {cutoff_b})")


def _all_labels(cutoff_c, cutoff_b):
    return (
        OccupationLabel(*lab)
        for lab in itertools.product(
            range(2), range(cutoff_c + 1), range(cutoff_b + 1), range(2), range(cutoff_c + 1)
        )
    )


def build_sector(cutoff_c: int, cutoff_b: int, N: int) -> SectorSpace:
    """All kets with weighted excitation exactly ``N``, sorted."""
    _check_cutoffs(cutoff_c, cutoff_b)
    if N < 0:
        raise ValidationError(f"excitation number must be >= 0, got {N}")
    labels = tuple(lab for lab in _all_labels(cutoff_c, cutoff_b) if lab.excitation == N)
    if not labels:
        raise EmptySectorError(
            f"no basis state has excitation {N} with cutoff_c={cutoff_c}, cutoff_b={cutoff_b}"
        )
    return SectorSpace(labels, cutoff_c, cutoff_b, N)


def build_full_space(cutoff_c: int, cutoff_b: int) -> SectorSpace:
    """The unprojected truncated tensor product, for leakage checks."""
    _check_cutoffs(cutoff_c, cutoff_b)
    return SectorSpace(tuple(_all_labels(cutoff_c, cutoff_b)), cutoff_c, cutoff_b, None)


@dataclass(frozen=True, eq=False)
class EmbeddedOperator:
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator must be square, got shape {m.shape}")
        if self.hermitian and m.size and np.abs(m - m.conj().T).max() > 1e-14:
            raise ValidationError("operator flagged hermitian but M != M^dagger")

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __matmul__(self, other):
        if isinstance(other, EmbeddedOperator):
            return EmbeddedOperator(self.matrix @ other.matrix)
        return self.matrix @ other


def _local(kind, d):
    if kind == "annihilate":
        return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    if kind == "create":
        return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=-1)
    if kind == "number":
        return np.diag(np.arange(d, dtype=float))
    # qubit basis: index 0 = ground, 1 = excited
    if kind == "sigma_z":
        return np.diag([-1.0, 1.0])
    if kind == "sigma_plus":
        return np.array([[0.0, 0.0], [1.0, 0.0]])
    if kind == "sigma_minus":
        return np.array([[0.0, 1.0], [0.0, 0.0]])
    raise ValidationError(f"unknown operator kind {kind!r}")


def full_space_operator(dims, which: str, kind: str) -> np.ndarray:
    """Dense matrix of a local operator on the full tensor product."""
    pos = subsystem_index(which)
    allowed = QUBIT_KINDS if which in QUBITS else BOSONIC_KINDS
    if kind not in allowed:
        raise ValidationError(
            f"operator kind {kind!r} does not apply to subsystem {which!r} "
            f"(allowed: {', '.join(allowed)})"
        )
    out = np.ones((1, 1))
    for i, d in enumerate(dims):
        out = np.kron(out, _local(kind, d) if i == pos else np.eye(d))
    return out


def project(space: SectorSpace, full_matrix: np.ndarray) -> np.ndarray:
    """Restrict a full-space matrix to the rows and columns of ``space``."""
    idx = space.full_indices
    return np.ascontiguousarray(full_matrix[np.ix_(idx, idx)])


def subsystem_operator(space: SectorSpace, which: str, kind: str) -> EmbeddedOperator:
    """Matrix elements ``<row|op|col>`` between kets of ``space``.

    On a single sector a bare ladder operator changes the excitation number,
    so its sector block is identically zero; build excitation-conserving
    products on the full space (``build_full_space``) and ``project`` them.
    """
    full = full_space_operator(space.subsystem_dims, which, kind)
    return EmbeddedOperator(project(space, full), hermitian=kind in ("number", "sigma_z"))


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    space: SectorSpace
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (self.space.dim,):
            raise ValidationError(
                f"state has {amps.shape} amplitudes, space has dimension {self.space.dim}"
            )
        if self.check and abs(np.linalg.norm(amps) - 1.0) > 1e-9:
            raise ValidationError(f"state norm {np.linalg.norm(amps)!r} differs from 1")

    @classmethod
    def basis(cls, space: SectorSpace, label) -> "StateVector":
        label = OccupationLabel(*label)
        if label not in space.index_of:
            raise ValidationError(f"{label.ket()} is not in {space!r}")
        amps = np.zeros(space.dim, dtype=np.complex128)
        amps[space.index_of[label]] = 1.0
        return cls(amps, space)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


# -- ket expressions --------------------------------------------------------

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class _Parser:
    """Recursive descent over::

        expr    := term (('+' | '-') term)*
        term    := [coef ['*']] atom [('/' divisor)]
        atom    := ket | '(' expr ')'
        coef    := number ['i'] | 'i' | '(' complex ')'
        divisor := 'sqrt(' number ')' | number
    """

    def __init__(self, text, space):
        self.text = text
        self.pos = 0
        self.space = space
        self.n_digits = 5
        self.short_ok = space.cutoff_b == 0

    def error(self, msg, pos=None):
        raise StateParseError(msg, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            found = repr(self.peek()) if self.peek() else "end of input"
            self.error(f"expected {ch!r}, found {found}")
        self.pos += 1

    def parse(self):
        vec = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return vec

    def expr(self):
        sign = 1.0
        if self.peek() in "+-":
            sign = -1.0 if self.peek() == "-" else 1.0
            self.pos += 1
        vec = sign * self.term()
        while self.peek() in ("+", "-"):
            sign = -1.0 if self.peek() == "-" else 1.0
            self.pos += 1
            vec = vec + sign * self.term()
        return vec

    def term(self):
        coef = 1.0 + 0j
        ch = self.peek()
        if ch == "(" and not self._group_is_expr():
            coef = self.paren_complex()
        elif ch and (ch.isdigit() or ch == "." or ch == "i"):
            coef = self.real_or_imag()
        if coef is not None and self.peek() == "*":
            self.pos += 1
        vec = coef * self.atom()
        if self.peek() == "/":
            self.pos += 1
            d = self.divisor()
            if d == 0:
                self.error("division by zero")
            vec = vec / d
        return vec

    def _group_is_expr(self):
        depth = 0
        for j in range(self.pos, len(self.text)):
            c = self.text[j]
            if c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
                if depth == 0:
                    return False
            elif c == "|":
                return True
        return False

    def number(self):
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error("expected a number")
        self.pos = m.end()
        return float(m.group(0))

    def real_or_imag(self):
        self.skip()
        if self.text[self.pos] == "i":
            self.pos += 1
            return 1j
        val = self.number()
        if self.pos < len(self.text) and self.text[self.pos] == "i":
            self.pos += 1
            return val * 1j
        return complex(val)

    def paren_complex(self):
        start = self.pos
        self.expect("(")
        end = self.text.find(")", self.pos)
        if end < 0:
            self.error("unclosed '('", start)
        body = re.sub(r"\s+", "", self.text[self.pos:end])
        body = re.sub(r"(?<![\d.])i", "1i", body).replace("i", "j")
        try:
            val = complex(body)
        except ValueError:
            self.error(f"malformed complex coefficient {self.text[start:end + 1]!r}", start)
        self.pos = end + 1
        return val

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            vec = self.expr()
            self.expect(")")
            return vec
        if ch == "|":
            return self.ket()
        self.error("expected a ket '|...>' or '('")

    def ket(self):
        start = self.pos
        self.pos += 1
        end = self.text.find(">", self.pos)
        if end < 0:
            self.error("unclosed ket", start)
        digits = self.text[self.pos:end]
        if not digits.isdigit():
            self.error(f"ket {self.text[start:end + 1]!r} must contain digits only", start)
        if len(digits) == 4 and self.short_ok:
            digits = digits[:2] + "0" + digits[2:]
        if len(digits) != 5:
            self.error(
                f"ket {self.text[start:end + 1]!r} needs 5 digits |q1 f1 fb q2 f2>", start
            )
        label = OccupationLabel(*(int(c) for c in digits))
        if label not in self.space.index_of:
            self.error(f"ket {label.ket()} is not in {self.space!r}", start)
        self.pos = end + 1
        vec = np.zeros(self.space.dim, dtype=np.complex128)
        vec[self.space.index_of[label]] = 1.0
        return vec

    def divisor(self):
        self.skip()
        if self.text.startswith("sqrt", self.pos):
            self.pos += 4
            self.expect("(")
            val = self.number()
            self.expect(")")
            return np.sqrt(val)
        return self.number()


def parse_state_expr(expr: str, space: SectorSpace, normalize: bool = True) -> StateVector:
    """Parse e.g. ``"(|00100>+|01001>)/sqrt(2)"`` or ``"0.6|10010> + 0.8i|00011>"``.

    Five-digit kets follow the ``|q1 f1 fb q2 f2>`` order; four-digit kets
    ``|q1 f1 q2 f2>`` are accepted when the pump mode is truncated away.
    """
    if not expr.strip():
        raise StateParseError("empty state expression", expr, 0)
    vec = _Parser(expr, space).parse()
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise StateParseError("state expression evaluates to the zero vector", expr, 0)
    if normalize:
        vec = vec / norm
    return StateVector(vec, space)


def _fmt_complex(z: complex) -> str:
    re_, im = float(z.real), float(z.imag)
    if im == 0:
        return repr(re_) if re_ > 0 else f"({re_!r})"
    sign = "-" if im < 0 else "+"
    return f"({re_!r}{sign}{abs(im)!r}i)"


def format_state(state: StateVector, tol: float = 0.0) -> str:
    """Inverse of ``parse_state_expr`` with exact (repr) coefficients."""
    terms = [
        f"{_fmt_complex(a)}{lab.ket()}"
        for lab, a in zip(state.space.labels, state.amplitudes)
        if abs(a) > tol
    ]
    return " + ".join(terms) if terms else "0"
