"""Field-mediated coupling of two magnetic dipoles in free space.

Kernels are evaluated per dipole-pair component ``(m1, m2)`` where the moment vectors
may be complex spin matrix elements; all vector products are bilinear (no complex
conjugation). Energies are SI joules unless stated; assembled Hamiltonians are
returned as angular frequencies (H / hbar).
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import constants as K
from .qmath import IX, IY, IZ, tensor

SPIN = ("u", "d")  # up, down
_IDX = {"u": 0, "d": 1}


class QuadratureError(ArithmeticError):
    def __init__(self, message, estimate, error):
        super().__init__(f"{message}: estimate {estimate!r}, error {error:.3e}")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class DipolePair:
    """One ``(m1, m2)`` component together with the geometry."""

    m1: tuple
    m2: tuple
    r: float
    rhat: tuple = (0.0, 0.0, 1.0)
    mu0: float = K.MU0
    c: float = K.C_LIGHT

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("separation r must be positive")
        rhat = np.asarray(self.rhat, dtype=float)
        if abs(np.linalg.norm(rhat) - 1.0) > 1e-12:
            raise ValueError("rhat must be a unit vector")

    @property
    def products(self):
        """``(m1.m2, (m1.rhat)(m2.rhat))`` without conjugation."""
        m1, m2 = np.asarray(self.m1), np.asarray(self.m2)
        rhat = np.asarray(self.rhat, dtype=float)
        return complex(m1 @ m2), complex((m1 @ rhat) * (m2 @ rhat))

    def eta(self, omega):
        return omega * self.r / self.c


def _real_if_close(z):
    z = complex(z)
    return z.real if z.imag == 0 else z


def spectral_density_J(omega, pair):
    """Free-space spectral density of the coupling between the two dipoles.

    ``J = mu0/(2 pi r^3) {m1.m2 [e^2 sin e + e cos e - sin e]
    - 3 (m1.r)(m2.r) [e^2 sin e / 3 + e cos e - sin e]}`` with ``e = omega r / c``.
    The bracket is odd in ``e``, so negative frequencies give ``J(-w) = -J(w)``.
    """
    a, b = pair.products
    e = pair.eta(omega)
    f1, f2 = _j_bracket(e, 1.0), _j_bracket(e, 1.0 / 3.0)
    return _real_if_close(pair.mu0 / (2 * math.pi * pair.r**3) * (a * f1 - 3 * b * f2))


def _j_bracket(e, w, small=0.1, terms=10):
    """``w e^2 sin e + e cos e - sin e``; a Taylor series near zero avoids cancellation."""
    if abs(e) >= small:
        return w * e * e * math.sin(e) + e * math.cos(e) - math.sin(e)
    total = 0.0
    for k in range(terms, 0, -1):
        sign = -1.0 if k % 2 else 1.0
        ck = -sign * w / math.factorial(2 * k - 1) + sign / math.factorial(2 * k) - sign / math.factorial(2 * k + 1)
        total = total * e * e + ck
    return total * e**3


def principal_kernel_K(omega, pair):
    """Time-local (principal value) part of the coupling at transition frequency ``omega``."""
    a, b = pair.products
    e = pair.eta(omega)
    s, co = math.sin(e), math.cos(e)
    g1 = -e * e * co + e * s + co
    g2 = -e * e * co / 3 + e * s + co
    return _real_if_close(pair.mu0 / (4 * math.pi * pair.r**3) * (a * g1 - 3 * b * g2))


def static_kernel(pair):
    """Closed form at zero frequency, ``mu0/(4 pi r^3) [m1.m2 - 3 (m1.r)(m2.r)]``."""
    a, b = pair.products
    return _real_if_close(pair.mu0 / (4 * math.pi * pair.r**3) * (a - 3 * b))


def spin_moments(gamma, hbar=K.HBAR):
    """Matrix elements ``<x| hbar gamma S |y>`` of a spin-1/2 magnetic moment (J/T)."""
    ops = (IX, IY, IZ)
    return {
        (x, y): tuple(hbar * gamma * op[_IDX[x], _IDX[y]] for op in ops)
        for x in SPIN
        for y in SPIN
    }


@dataclass(frozen=True)
class FieldKernelConfig:
    """Two spin-1/2 dipoles: moment tables, level energies and geometry.

    ``m1``/``m2`` map ``(x, y)`` to ``<x|m|y>``; ``levels1``/``levels2`` map a spin
    label to its energy in rad/s, so ``Omega^{yx} = E_y - E_x``.
    """

    m1: dict
    m2: dict
    r: float
    rhat: tuple = (0.0, 0.0, 1.0)
    levels1: dict = field(default_factory=lambda: {"u": 0.0, "d": 0.0})
    levels2: dict = field(default_factory=lambda: {"u": 0.0, "d": 0.0})
    mu0: float = K.MU0
    c: float = K.C_LIGHT
    hbar: float = K.HBAR

    @classmethod
    def spin_pair(cls, gamma1, gamma2, r, rhat=(0.0, 0.0, 1.0), omega1=0.0, omega2=0.0, **kw):
        """Spins with gyromagnetic ratios in rad/(s T) and Larmor splittings ``E_u - E_d``."""
        hbar = kw.get("hbar", K.HBAR)
        return cls(
            spin_moments(gamma1, hbar),
            spin_moments(gamma2, hbar),
            r,
            tuple(rhat),
            {"u": omega1 / 2, "d": -omega1 / 2},
            {"u": omega2 / 2, "d": -omega2 / 2},
            **kw,
        )

    def pair(self, yx, uv):
        return DipolePair(self.m1[yx], self.m2[uv], self.r, self.rhat, self.mu0, self.c)

    def omega1(self, yx):
        y, x = yx
        return self.levels1[y] - self.levels1[x]

    def omega2(self, uv):
        u, v = uv
        return self.levels2[u] - self.levels2[v]

    def components(self):
        keys = [(x, y) for x in SPIN for y in SPIN]
        return [(yx, uv) for yx in keys for uv in keys]


def couplings(cfg):
    """Principal and dissipative coefficient tables keyed by ``(yx, uv)``.

    ``G_P = [K_12(Omega1) + K_21(Omega2)] / 2`` and
    ``G_D = [J_12(Omega1) + J_21(Omega2)] / (4i)``; the moment products are symmetric,
    so both directions share one pair object.
    """
    gp, gd = {}, {}
    for yx, uv in cfg.components():
        p = cfg.pair(yx, uv)
        w1, w2 = cfg.omega1(yx), cfg.omega2(uv)
        gp[(yx, uv)] = complex(0.5 * (principal_kernel_K(w1, p) + principal_kernel_K(w2, p)))
        gd[(yx, uv)] = complex((spectral_density_J(w1, p) + spectral_density_J(w2, p)) / 4j)
    return gp, gd


def _tau(xy):
    t = np.zeros((2, 2), dtype=complex)
    t[_IDX[xy[0]], _IDX[xy[1]]] = 1
    return t


def assemble_HF(cfg, dissipative=True):
    """Time-local interaction ``sum (G_P + G_D) tau1^{yx} tau2^{uv}`` divided by hbar (zz basis)."""
    gp, gd = couplings(cfg)
    h = np.zeros((4, 4), dtype=complex)
    for key in gp:
        yx, uv = key
        coef = gp[key] + (gd[key] if dissipative else 0.0)
        h += coef * tensor(_tau(yx), _tau(uv))
    return h / cfg.hbar


def spin_vectors():
    return (IX, IY, IZ)


def dipolar_lambda(gamma1, gamma2, r, mu0=K.MU0, hbar=K.HBAR):
    """Coefficient of ``3 (I1.r)(I2.r) - I1.I2`` in rad/s for two spins."""
    return -mu0 * hbar * gamma1 * gamma2 / (4 * math.pi * r**3)


def dipolar_hamiltonian(lam, rhat=(0.0, 0.0, 1.0)):
    """``lam [3 (I1.r)(I2.r) - I1.I2]`` in the zz basis."""
    rhat = np.asarray(rhat, dtype=float)
    ops = spin_vectors()
    i1r = sum(c * o for c, o in zip(rhat, ops))
    dot = sum(tensor(o, o) for o in ops)
    return lam * (3 * tensor(i1r, i1r) - dot)


def secular_part(h):
    """Keep only the zz-diagonal (Iz Iz and Zeeman-like) terms."""
    return np.diag(np.diag(h))


def zz_coefficient(h):
    """Coefficient ``c`` of ``c Iz Iz`` in the zz-diagonal part of ``h``."""
    d = np.diag(h).real
    return float(d[0] - d[1] - d[2] + d[3])


def _damped_moment(n, kappa, rtol):
    # int_0^inf u^n e^{-u} e^{i kappa u} du for |kappa| <= 1: smooth, no oscillation
    def part(fn):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                return integrate.quad(fn, 0, np.inf, epsabs=0.0, epsrel=rtol, limit=500)
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(f"quadrature failed ({exc})", float("nan"), float("inf")) from None

    re, e1 = part(lambda u: u**n * math.exp(-u) * math.cos(kappa * u))
    im, e2 = part(lambda u: u**n * math.exp(-u) * math.sin(kappa * u))
    return complex(re, im), math.hypot(e1, e2)


def _moment(n, w, eta_cut, rtol):
    """``int_0^inf eta^n exp(-i w eta - eta/eta_cut) d eta`` by quadrature.

    Slow phases stay on the real axis. Fast ones are rotated onto the imaginary
    axis (``eta = -i sign(w) t``), where the integrand decays instead of
    oscillating; the closing arc vanishes because the cutoff damping is kept.
    """
    if abs(w) * eta_cut <= 1.0:
        scale = eta_cut ** (n + 1)
        v, e = _damped_moment(n, -w * eta_cut, rtol)
    else:
        sg = 1.0 if w > 0 else -1.0
        scale = (-1j * sg / abs(w)) ** (n + 1)
        v, e = _damped_moment(n, sg / (abs(w) * eta_cut), rtol)
    return scale * v, abs(scale) * e


def memory_kernel_D(s, pair, cutoff=None, rtol=1e-12):
    """Regularised memory kernel ``-i int_0^inf dw/2pi J(w) e^{-i w s} e^{-w/cutoff}``.

    ``cutoff`` defaults to ``100 c / r``. Returns ``(value, error_estimate)``.
    """
    if s < 0:
        raise ValueError("memory kernel needs s >= 0")
    cutoff = 100 * pair.c / pair.r if cutoff is None else cutoff
    if not cutoff > 0:
        raise ValueError("cutoff frequency must be positive")
    a, b = pair.products
    S = s * pair.c / pair.r
    ec = cutoff * pair.r / pair.c
    # J(eta) = P [(a-b) eta^2 sin + (a-3b)(eta cos - sin)]; write sin, cos via e^{+-i eta}
    total = 0j
    err = size = 0.0
    for nu in (1.0, -1.0):
        w = S - nu
        coefs = ((2, (a - b) * nu / 2j), (1, (a - 3 * b) / 2), (0, -(a - 3 * b) * nu / 2j))
        for n, coef in coefs:
            if coef == 0:
                continue
            v, e = _moment(n, w, ec, rtol)
            total += coef * v
            err += abs(coef) * e
            size += abs(coef * v)
    pref = -1j * (pair.c / pair.r) / (2 * math.pi) * pair.mu0 / (2 * math.pi * pair.r**3)
    value = pref * total
    error = abs(pref) * err
    # judged against the size of the pieces: at large s they cancel strongly
    if not np.isfinite(value) or err > 1e-8 * size:
        raise QuadratureError("memory kernel quadrature did not converge", value, error)
    return value, error
