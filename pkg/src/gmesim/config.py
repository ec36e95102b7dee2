"""Experiment configuration: an INI file whose quantity keys carry their unit.

Example::

    [atom]
    hyperfine_a_mhz = 12642.812      # cyclic, multiplied by 2 pi
    b0_gauss = 5.615

    [noise]
    enabled = true
    t2_14_us = 138.5

    [run]
    program = fig1c                  # or a path to a pulse program
    phi_rad = 0, pi/4, pi/2, pi      # or delta_mrad_s = ... with tau_us = ...
    tau_us = 2
    shots = 500
    seed = 1
    format = csv

Frequency keys must end in ``_hz``, ``_khz``, ``_mhz`` (cyclic) or ``_rad_s``,
``_krad_s``, ``_mrad_s`` (angular); a bare frequency key is rejected.
"""
import configparser
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import constants as K
from .atom import AtomParams
from .noise import NoiseModel

FREQ_UNITS = {
    "hz": K.TWO_PI,
    "khz": K.TWO_PI * 1e3,
    "mhz": K.TWO_PI * 1e6,
    "rad_s": 1.0,
    "krad_s": 1e3,
    "mrad_s": 1e6,
}
GAMMA_UNITS = {f"{u}_per_gauss": f for u, f in FREQ_UNITS.items()}
TIME_UNITS = {"ns": 1e-9, "us": 1e-6, "ms": 1e-3, "s": 1.0}
ANGLE_UNITS = {"rad": 1.0, "deg": math.pi / 180}
FORMATS = ("csv", "json")
DEFAULT_SHOTS = 500
DEFAULT_TAU = 2e-6

# keys that are frequencies and therefore must carry a unit suffix
_FREQ_BASES = {"hyperfine_a", "omega0", "delta", "gamma_nuclear", "gamma_electron"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the section and key."""


def _number(text, where):
    t = text.strip().replace(" ", "")
    m = re.fullmatch(r"([+-]?[\d.eE+-]*)\*?pi(?:/([\d.eE+-]+))?", t)
    try:
        if m:
            k = m.group(1)
            k = 1.0 if k in ("", "+") else -1.0 if k == "-" else float(k)
            return k * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
        return float(t)
    except ValueError:
        raise ConfigError(f"{where}: cannot read {text.strip()!r} as a number") from None


def _list(text, where):
    items = [x for x in text.split(",") if x.strip()]
    return [_number(x, where) for x in items]


def _lookup(sec, base, units, name):
    """Find ``base_<unit>`` in ``sec``; returns ``(key, factor)`` or ``None``."""
    found = [(f"{base}_{u}", f) for u, f in units.items() if f"{base}_{u}" in sec]
    if len(found) > 1:
        keys = ", ".join(k for k, _ in found)
        raise ConfigError(f"[{name}] gives {base} more than once ({keys})")
    return found[0] if found else None


def _scale(v, factor):
    # 100 us -> 1e-4 exactly, not 100 * 1e-6
    inv = 1 / factor
    return v / round(inv) if factor < 1 and abs(inv - round(inv)) < 1e-6 else v * factor


def _quantity(sec, name, base, units, default=None, many=False):
    hit = _lookup(sec, base, units, name)
    if hit is None:
        if base in sec:
            raise ConfigError(
                f"[{name}] {base}: unit missing; use one of " + ", ".join(f"{base}_{u}" for u in units)
            )
        return default
    key, factor = hit
    where = f"[{name}] {key}"
    if many:
        return [_scale(v, factor) for v in _list(sec[key], where)]
    return _scale(_number(sec[key], where), factor)


def _check_keys(sec, name, allowed):
    for key in sec:
        if key not in allowed:
            base = key.rsplit("_", 1)[0]
            hint = " (frequencies need a unit suffix such as _mhz or _mrad_s)" if key in _FREQ_BASES or base in _FREQ_BASES else ""
            raise ConfigError(f"[{name}] unknown key {key!r}{hint}")


def _with_units(base, units):
    return {f"{base}_{u}" for u in units}


@dataclass(frozen=True)
class FieldGrid:
    eta: tuple = ()  # omega r / c for J
    eta_prime: tuple = (0.0, 1e-6, 1e-3, 0.1, 1.0, 10.0)  # for K and the near-field residual
    s_light: tuple = (1.0, 10.0, 100.0)  # s in units of r / c
    cutoff_light: float = 100.0  # omega_cut in units of c / r
    r: float = 1e-6  # m
    rhat: tuple = (0.0, 0.0, 1.0)
    gamma1: float = abs(K.GAMMA_ELECTRON) * 1e4  # rad/(s T)
    gamma2: float = abs(K.GAMMA_ELECTRON) * 1e4


@dataclass(frozen=True)
class ExperimentConfig:
    atom: AtomParams = field(default_factory=AtomParams)
    noise: NoiseModel = None  # None: no [noise] section given
    program: str = "fig1c"
    phi: tuple = None
    delta: tuple = None
    tau: tuple = None
    shots: int = DEFAULT_SHOTS
    seed: int = None
    fmt: str = "csv"
    infinite_shots: bool = False
    n_boot: int = 0
    sweep_tau: tuple = tuple(k * 25 / 1e6 for k in range(17))  # 0 .. 400 us
    sweep_phi: float = math.pi / 2
    grid: FieldGrid = field(default_factory=FieldGrid)

    def __post_init__(self):
        if (self.phi is None) == (self.delta is None):
            raise ConfigError("[run] give exactly one of phi_* or delta_* (with tau_*)")
        if self.delta is not None:
            if not self.tau:
                raise ConfigError("[run] delta_* needs tau_*")
            if len(self.tau) not in (1, len(self.delta)):
                raise ConfigError("[run] tau_* must have one value or one per delta")
        if self.tau is not None:
            if self.phi is not None and len(self.tau) not in (1, len(self.phi)):
                raise ConfigError("[run] tau_* must have one value or one per phi")
            if any(t < 0 for t in self.tau):
                raise ConfigError("[run] tau_* must be non-negative")
        if self.fmt not in FORMATS:
            raise ConfigError(f"[run] format must be one of {FORMATS}, got {self.fmt!r}")
        if not self.infinite_shots:
            if self.shots is None or self.shots < 1:
                raise ConfigError("[run] shots must be a positive integer")
            if self.seed is None:
                raise ConfigError("[run] seed is required when shots are finite (or set infinite_shots = true)")
        if self.n_boot < 0:
            raise ConfigError("[run] bootstrap must be non-negative")
        if any(t < 0 for t in self.sweep_tau):
            raise ConfigError("[sweep] tau values must be non-negative")

    def points(self):
        """``(phi, tau)`` for every run."""
        if self.phi is not None:
            taus = self.tau or (DEFAULT_TAU,)
            if len(taus) == 1:
                taus = taus * len(self.phi)
            return list(zip(self.phi, taus))
        taus = self.tau * len(self.delta) if len(self.tau) == 1 else self.tau
        return [(d * t, t) for d, t in zip(self.delta, taus)]

    def echo(self):
        """Plain dictionary of every input, for output records."""
        return {
            "atom": asdict(self.atom),
            "noise": None if self.noise is None else {f"{u}-{v}": b for (u, v), b in sorted(self.noise.beta.items())},
            "program": self.program,
            "shots": None if self.infinite_shots else self.shots,
            "seed": self.seed,
            "bootstrap": self.n_boot,
        }

    def replace(self, **kw):
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return ExperimentConfig(**d)


def _atom(cp):
    if not cp.has_section("atom"):
        return AtomParams()
    sec = cp["atom"]
    allowed = (
        _with_units("hyperfine_a", FREQ_UNITS)
        | _with_units("omega0", FREQ_UNITS)
        | _with_units("gamma_nuclear", GAMMA_UNITS)
        | _with_units("gamma_electron", GAMMA_UNITS)
        | {"b0_gauss"}
    )
    _check_keys(sec, "atom", allowed)
    d = AtomParams()
    kw = {
        "A": _quantity(sec, "atom", "hyperfine_a", FREQ_UNITS, d.A),
        "omega0": _quantity(sec, "atom", "omega0", FREQ_UNITS, d.omega0),
        "gamma_a": _quantity(sec, "atom", "gamma_nuclear", GAMMA_UNITS, d.gamma_a),
        "gamma_b": _quantity(sec, "atom", "gamma_electron", GAMMA_UNITS, d.gamma_b),
        "B0": _number(sec["b0_gauss"], "[atom] b0_gauss") if "b0_gauss" in sec else d.B0,
    }
    try:
        return AtomParams(**kw)
    except ValueError as exc:
        raise ConfigError(f"[atom] {exc}") from None


_PAIRS = ("12", "13", "14", "23", "24", "34")


def _noise(cp):
    if not cp.has_section("noise"):
        return None
    sec = cp["noise"]
    allowed = {"enabled"} | set().union(*(_with_units(f"t2_{p}", TIME_UNITS) for p in _PAIRS))
    _check_keys(sec, "noise", allowed)
    try:
        enabled = sec.getboolean("enabled", fallback=True)
    except ValueError:
        raise ConfigError("[noise] enabled must be true or false") from None
    if not enabled:
        return NoiseModel.noiseless()
    beta = dict(K.T2_STAR)
    for p in _PAIRS:
        v = _quantity(sec, "noise", f"t2_{p}", TIME_UNITS)
        if v is not None:
            beta[(int(p[0]), int(p[1]))] = v
    try:
        return NoiseModel(beta)
    except ValueError as exc:
        raise ConfigError(f"[noise] {exc}") from None


def _field(cp):
    if not cp.has_section("fieldtheory"):
        return FieldGrid()
    sec = cp["fieldtheory"]
    allowed = {"eta", "eta_prime", "s_light", "cutoff_light", "rhat"} | {"r_m", "r_um", "r_nm"}
    allowed |= {"gamma1_rad_s_t", "gamma2_rad_s_t"}
    _check_keys(sec, "fieldtheory", allowed)
    d = FieldGrid()
    kw = {}
    for key in ("eta", "eta_prime", "s_light", "rhat"):
        if key in sec:
            kw[key] = tuple(_list(sec[key], f"[fieldtheory] {key}"))
    if "cutoff_light" in sec:
        kw["cutoff_light"] = _number(sec["cutoff_light"], "[fieldtheory] cutoff_light")
    r = _quantity(sec, "fieldtheory", "r", {"m": 1.0, "um": 1e-6, "nm": 1e-9}, d.r)
    kw["r"] = r
    for g in ("gamma1", "gamma2"):
        if f"{g}_rad_s_t" in sec:
            kw[g] = _number(sec[f"{g}_rad_s_t"], f"[fieldtheory] {g}_rad_s_t")
    grid = FieldGrid(**kw)
    if not grid.r > 0:
        raise ConfigError("[fieldtheory] r must be positive")
    if len(grid.rhat) != 3 or abs(math.fsum(x * x for x in grid.rhat) - 1) > 1e-12:
        raise ConfigError("[fieldtheory] rhat must be a unit 3-vector")
    if not grid.cutoff_light > 0:
        raise ConfigError("[fieldtheory] cutoff_light must be positive")
    if any(x < 0 for x in grid.s_light) or any(x < 0 for x in grid.eta):
        raise ConfigError("[fieldtheory] grids must be non-negative")
    return grid


def parse_config(text, source="<config>", overrides=None):
    """Build an :class:`ExperimentConfig`; ``overrides`` (e.g. command-line flags) win."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    known = {"atom", "noise", "run", "sweep", "fieldtheory"}
    for s in cp.sections():
        if s not in known:
            raise ConfigError(f"unknown section [{s}]")
    kw = {"atom": _atom(cp), "noise": _noise(cp), "grid": _field(cp)}
    run = cp["run"] if cp.has_section("run") else {}
    allowed = (
        {"program", "shots", "seed", "format", "infinite_shots", "bootstrap"}
        | _with_units("phi", ANGLE_UNITS)
        | _with_units("delta", FREQ_UNITS)
        | _with_units("tau", TIME_UNITS)
    )
    _check_keys(run, "run", allowed)
    phi = _quantity(run, "run", "phi", ANGLE_UNITS, many=True)
    delta = _quantity(run, "run", "delta", FREQ_UNITS, many=True)
    tau = _quantity(run, "run", "tau", TIME_UNITS, many=True)
    if phi is None and delta is None:
        phi = [math.pi / 2]
    kw["phi"] = tuple(phi) if phi is not None else None
    kw["delta"] = tuple(delta) if delta is not None else None
    kw["tau"] = tuple(tau) if tau is not None else None
    kw["program"] = run.get("program", "fig1c").strip()
    for key, conv in (("shots", int), ("seed", int), ("bootstrap", int)):
        if key in run:
            try:
                kw["n_boot" if key == "bootstrap" else key] = conv(run[key])
            except ValueError:
                raise ConfigError(f"[run] {key} must be an integer, got {run[key]!r}") from None
    kw["fmt"] = run.get("format", "csv").strip()
    if "infinite_shots" in run:
        v = run["infinite_shots"].strip().lower()
        if v not in ("true", "false", "yes", "no", "1", "0"):
            raise ConfigError("[run] infinite_shots must be true or false")
        kw["infinite_shots"] = v in ("true", "yes", "1")
    if cp.has_section("sweep"):
        sec = cp["sweep"]
        _check_keys(sec, "sweep", _with_units("tau", TIME_UNITS) | _with_units("phi", ANGLE_UNITS))
        kw["sweep_tau"] = tuple(_quantity(sec, "sweep", "tau", TIME_UNITS, [], many=True))
        kw["sweep_phi"] = _quantity(sec, "sweep", "phi", ANGLE_UNITS, math.pi / 2)
    kw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig(**kw)


def load_config(path, overrides=None):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(p), overrides)
