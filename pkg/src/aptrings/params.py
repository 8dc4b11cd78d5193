"""Physical constants of the two-ring system and the quantities derived from them.

Everything inside the package is expressed in the mm-kg-s-K unit system.
Constructors that take other units convert exactly once, here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ParameterError

# Conversion factors into mm-kg-s-K.
MM_PER_M = 1.0e3
_KG_PER_M3_TO_KG_PER_MM3 = 1.0e-9
_W_PER_MK_TO_W_PER_MMK = 1.0e-3
_M2_TO_MM2 = 1.0e6


def _require_positive(**values):
    for name, value in values.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ParameterError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Material and interface constants in mm-kg-s-K units.

    D   diffusivity [mm^2/s]
    rho density [kg/mm^3]
    c   heat capacity [J/(kg K)]
    k_i interface conductivity [W/(mm K)]
    d   interface thickness [mm]
    b   ring thickness [mm]
    """

    D: float
    rho: float
    c: float
    k_i: float
    d: float
    b: float

    def __post_init__(self):
        _require_positive(D=self.D, rho=self.rho, c=self.c, k_i=self.k_i, d=self.d, b=self.b)

    @classmethod
    def from_si(cls, D, rho, c, k_i, d, b):
        """Build from pure SI values (m^2/s, kg/m^3, J/(kg K), W/(m K), m, m)."""
        return cls(
            D=D * _M2_TO_MM2,
            rho=rho * _KG_PER_M3_TO_KG_PER_MM3,
            c=c,
            k_i=k_i * _W_PER_MK_TO_W_PER_MMK,
            d=d * MM_PER_M,
            b=b * MM_PER_M,
        )

    @classmethod
    def from_lab_units(cls, D_mm2_s, rho_kg_m3, c_J_kgK, k_i_W_mK, d_mm, b_mm):
        """Build from the mixed units quoted for the experiment (mm^2/s, kg/m^3, W/(m K), mm)."""
        return cls(
            D=D_mm2_s,
            rho=rho_kg_m3 * _KG_PER_M3_TO_KG_PER_MM3,
            c=c_J_kgK,
            k_i=k_i_W_mK * _W_PER_MK_TO_W_PER_MMK,
            d=d_mm,
            b=b_mm,
        )

    @property
    def h(self):
        """Interface heat-exchange coefficient k_i/d [W/(mm^2 K)]."""
        return self.k_i / self.d

    @property
    def hc(self):
        return derive_hc(self)

    def replace(self, **changes):
        values = {name: getattr(self, name) for name in ("D", "rho", "c", "k_i", "d", "b")}
        values.update(changes)
        return PhysicalParams(**values)


def reference_params():
    """Constants of the reference experiment; gives h_c = 0.2 1/s and D = 100 mm^2/s."""
    return PhysicalParams.from_lab_units(
        D_mm2_s=100.0, rho_kg_m3=1000.0, c_J_kgK=1000.0, k_i_W_mK=1.0, d_mm=1.0, b_mm=5.0
    )


@dataclass(frozen=True)
class RingGeometry:
    """Inner-edge geometry. ``deltaR`` is carried as metadata and never enters the dynamics."""

    R: float
    deltaR: float = 0.0
    L: float = field(init=False)

    def __post_init__(self):
        _require_positive(R=self.R)
        if not (math.isfinite(self.deltaR) and self.deltaR >= 0):
            raise ParameterError(f"deltaR must be non-negative, got {self.deltaR!r}")
        object.__setattr__(self, "L", 2.0 * math.pi * self.R)

    @property
    def outer_radius(self):
        return self.R + self.deltaR


@dataclass(frozen=True)
class ModeSpec:
    """Ring harmonic ``n`` with wavenumber ``kappa = n / R`` [1/mm]."""

    n: int
    R: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n == 0:
            raise ParameterError(f"mode number must be a nonzero integer, got {self.n!r}")
        _require_positive(R=self.R)
        object.__setattr__(self, "n", int(self.n))

    @property
    def kappa(self):
        return self.n / self.R


def derive_hc(p: PhysicalParams) -> float:
    """Coupling rate h_c = k_i / (d rho c b) [1/s]."""
    return p.k_i / (p.d * p.rho * p.c * p.b)


def hc_si(D, rho, c, k_i, d, b):
    """Same rate evaluated directly in SI units, kept separate to check the conversion."""
    _require_positive(D=D, rho=rho, c=c, k_i=k_i, d=d, b=b)
    return (k_i / d) / (rho * c * b)


def v_ep(hc, kappa):
    """Exceptional-point tangential speed h_c/|kappa| [mm/s]."""
    if kappa == 0:
        raise ParameterError("the uniform mode (kappa = 0) has no exceptional point")
    return hc / abs(kappa)


def epsilon_of(p: PhysicalParams, R, n=1):
    """Dimensionless group h_c R^2 / (D n^2) at the exceptional point of mode ``n``."""
    _require_positive(R=R)
    if n == 0:
        raise ParameterError("mode number must be nonzero")
    return p.hc * R**2 / (p.D * n**2)


def lambda_of(p: PhysicalParams, R, n=1):
    """Decay exponent in units of h_c: 1 + 1/epsilon = 1 + D n^2/(h_c R^2)."""
    return 1.0 + 1.0 / epsilon_of(p, R, n)


def nondimensionalize(x, t, p: PhysicalParams, lam):
    """Map (x [mm], t [s]) to (z, tau) = (sqrt(h_c (lam-1)/D) x, h_c t)."""
    if not lam > 1.0:
        raise ParameterError(f"lambda must exceed 1, got {lam!r}")
    hc = p.hc
    return math.sqrt(hc * (lam - 1.0) / p.D) * x, hc * t


# ---------------------------------------------------------------------------
# key = value parameter files

#: key -> (unit comment, converter into mm-kg-s-K)
PARAM_KEYS = {
    "D": ("mm^2/s", lambda v: v),
    "rho": ("kg/m^3", lambda v: v * _KG_PER_M3_TO_KG_PER_MM3),
    "c": ("J/(kg K)", lambda v: v),
    "k_i": ("W/(m K)", lambda v: v * _W_PER_MK_TO_W_PER_MMK),
    "d": ("mm", lambda v: v),
    "b": ("mm", lambda v: v),
}


def parse_key_values(text, source="<string>"):
    """Parse ``key = value`` lines into an ordered dict of strings.

    Blank lines and lines starting with ``#`` are skipped. Duplicate keys and
    lines without ``=`` raise ConfigError.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def params_from_mapping(values, source="<mapping>"):
    """Build PhysicalParams from a mapping holding exactly the keys of PARAM_KEYS."""
    unknown = sorted(set(values) - set(PARAM_KEYS))
    if unknown:
        raise ConfigError(f"{source}: unknown parameter keys {unknown}")
    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing parameter keys {missing}")
    converted = {}
    for key, (_, convert) in PARAM_KEYS.items():
        try:
            converted[key] = convert(float(values[key]))
        except ValueError:
            raise ConfigError(f"{source}: {key} = {values[key]!r} is not a number") from None
    try:
        return PhysicalParams(**converted)
    except ParameterError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_params(path):
    path = Path(path)
    return params_from_mapping(parse_key_values(path.read_text(encoding="utf-8"), str(path)), str(path))


def format_params_file(p: PhysicalParams):
    """Inverse of :func:`load_params`; units follow the ``# key unit`` header convention."""
    back = {
        "D": p.D,
        "rho": p.rho / _KG_PER_M3_TO_KG_PER_MM3,
        "c": p.c,
        "k_i": p.k_i / _W_PER_MK_TO_W_PER_MMK,
        "d": p.d,
        "b": p.b,
    }
    lines = [f"# {key} {unit}" for key, (unit, _) in PARAM_KEYS.items()]
    lines += [f"{key} = {back[key]!r}" for key in PARAM_KEYS]
    return "\n".join(lines) + "\n"
