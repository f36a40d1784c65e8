"""Run configuration: a flat JSON object of typed fields.

Couplings are given as ratios (``lambda/omega``, ``J/lambda``, ``k0/omega``,
``delta/lambda``) so the numbers read the same as the physical setup they
describe.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .dynamics import IntegratorConfig, default_sample_times
from .errors import ValidationError
from .fock import SectorSpace, StateVector, build_sector, parse_state_expr
from .hamiltonian import OMEGA_DEFAULT, CouplingSchedule, SystemParams


@dataclass(frozen=True)
class RunConfig:
    omega: float = round(OMEGA_DEFAULT, 6)
    lambda_ratio: float = 0.1
    J_ratio: float = 0.05
    k0_ratio: float = 0.01
    Omega: float = 0.004444
    coupling: str = "harmonic"
    delta_ratio: float = 0.0
    initial_state: str = "|00100>"
    t_max: float = 2000.0
    dt_out: float = 1.0
    cutoff_c: int = 2
    cutoff_b: int = 1
    excitation: int = 2
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_step: float | None = None
    probabilities: bool = False

    def __post_init__(self):
        for f in dataclasses.fields(self):
            val = getattr(self, f.name)
            if isinstance(val, float) and not math.isfinite(val):
                raise ValidationError(f"config field {f.name!r} must be finite")
        if self.omega <= 0:
            raise ValidationError("config field 'omega' must be > 0")
        if self.t_max <= 0 or self.dt_out <= 0:
            raise ValidationError("config fields 't_max' and 'dt_out' must be > 0")
        if self.coupling not in ("constant", "harmonic"):
            raise ValidationError("config field 'coupling' must be 'constant' or 'harmonic'")

    # -- derived objects --------------------------------------------------
    @property
    def lam(self) -> float:
        return self.lambda_ratio * self.omega

    @property
    def J(self) -> float:
        return self.J_ratio * self.lam

    @property
    def k0(self) -> float:
        return self.k0_ratio * self.omega

    def params(self) -> SystemParams:
        return SystemParams.resonant(self.omega, self.lam, self.J, self.delta_ratio * self.lam)

    def schedule(self) -> CouplingSchedule:
        return CouplingSchedule(self.coupling, self.k0, self.Omega)

    def space(self) -> SectorSpace:
        return build_sector(self.cutoff_c, self.cutoff_b, self.excitation)

    def initial(self, space: SectorSpace | None = None) -> StateVector:
        return parse_state_expr(self.initial_state, space or self.space())

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            rel_tol=self.rel_tol, abs_tol=self.abs_tol,
            max_step=math.inf if self.max_step is None else self.max_step,
            sample_times=default_sample_times(self.t_max, self.dt_out),
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        fields = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - set(fields))
        if unknown:
            raise ValidationError(f"unknown config key(s): {', '.join(unknown)}")
        kwargs = {}
        for name, val in data.items():
            kwargs[name] = _coerce(name, fields[name].default, val)
        return cls(**kwargs)


def _coerce(name, default, val):
    if name == "max_step":
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ValidationError(f"config field {name!r} must be a number or null")
        return float(val)
    kind = type(default)
    if kind is bool:
        if not isinstance(val, bool):
            raise ValidationError(f"config field {name!r} must be true/false")
        return val
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ValidationError(f"config field {name!r} must be an integer")
        return val
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ValidationError(f"config field {name!r} must be a number")
        return float(val)
    if not isinstance(val, str):
        raise ValidationError(f"config field {name!r} must be a string")
    return val


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    data.update(overrides or {})
    return RunConfig.from_dict(data)
