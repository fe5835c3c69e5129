"""Hypothesized error laws: densities, location scores and tail functionals.

Every family is symmetric about zero and has finite Fisher information for
location.  All methods are vectorized over numpy arrays; scalar input gives
scalar output.

Tail functionals are the conditional moments of the score given ``e > x``.
They are the building blocks of the incomplete information matrix, so each
family computes them in closed form and in a way that keeps relative accuracy
deep in the right tail (we never form ``1 - F`` by subtraction).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import DomainError, FamilySpecError, TailOverflowError

__all__ = [
    "ErrorFamily",
    "Normal",
    "Logistic",
    "Laplace",
    "StudentT",
    "FamilyValues",
    "TailFunctionals",
    "parse_family",
    "family_eval",
    "quantile",
    "tail_functionals",
    "TAIL_LIMIT",
]

# survival below this is a tail overflow
TAIL_LIMIT = 1e-12

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_LOG2 = math.log(2.0)


def _out(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


class FamilyValues(NamedTuple):
    f: float
    F: float
    psi: float


class TailFunctionals(NamedTuple):
    x: float
    survival: float
    density_at: float
    sigma2: float
    cond_mean: float
    cond_var: float


class ErrorFamily:
    """Base class.  Subclasses implement the ``_``-prefixed array kernels."""

    kind: str = ""

    # -- public, vectorized -------------------------------------------------
    def pdf(self, x):
        return _out(self._pdf(np.asarray(x, dtype=float)))

    def cdf(self, x):
        return _out(self._cdf(np.asarray(x, dtype=float)))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return _out(self._cdf(-x))

    def score(self, x):
        """Location score ``psi_f = -f'/f``."""
        return _out(self._score(np.asarray(x, dtype=float)))

    def quantile(self, t):
        t = np.asarray(t, dtype=float)
        lower = np.minimum(t, 1.0 - t)
        x = self._lower_quantile(lower)
        return _out(np.where(t <= 0.5, x, -x))

    def isf(self, s):
        """Inverse survival function, accurate for tiny ``s``."""
        s = np.asarray(s, dtype=float)
        return _out(-self.quantile(s))

    def logit_cdf(self, x):
        """``log(F / (1 - F))`` evaluated without cancellation."""
        x = np.asarray(x, dtype=float)
        return _out(self._log_cdf(x) - self._log_cdf(-x))

    def from_logit(self, rho):
        """Inverse of :meth:`logit_cdf`."""
        rho = np.asarray(rho, dtype=float)
        t = special.expit(rho)
        s = special.expit(-rho)
        return _out(np.where(t < 0.5, self.quantile(np.minimum(t, 0.5)), self.isf(np.minimum(s, 0.5))))

    def sigma2(self, x):
        """Tail Fisher information ``int_x^inf psi^2 dF``."""
        x = np.asarray(x, dtype=float)
        return _out(self._cdf(-x) * self._cond_second(x))

    def cond_mean(self, x):
        return _out(self._cond_mean(np.asarray(x, dtype=float)))

    def cond_var(self, x):
        return _out(self._cond_var(np.asarray(x, dtype=float)))

    def degenerate(self, x):
        """True where the tail score is constant (the information matrix is singular)."""
        return _out(np.zeros(np.shape(x), dtype=bool))

    @property
    def degenerate_onset(self):
        """Point beyond which the tail score is constant, or ``None``."""
        return None

    @property
    def spec(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.spec

    # -- array kernels ------------------------------------------------------
    def _cond_second(self, x):
        """E[psi^2 | e > x]."""
        return self._cond_var(x) + self._cond_mean(x) ** 2

    def _log_cdf(self, x):
        return np.log(self._cdf(x))

    def _cond_mean(self, x):
        # int_x^inf psi dF = f(x)
        return self._pdf(x) / self._cdf(-x)

    def scale_moments(self, x):
        """Conditional ``(E[e psi^2 | e > x], E[e^2 psi^2 | e > x])``.

        These feed the third row of the scale-augmented information matrix.
        """
        raise NotImplementedError

    def scale_covariance(self, x):
        """Conditional ``(Cov(psi, phi), Var(phi))`` given ``e > x``, with
        ``phi = 1 + e psi``; ``x = -inf`` gives the unconditional values."""
        x = np.asarray(x, dtype=float)
        t1, t2 = self.scale_moments(x)
        m = np.asarray(self.cond_mean(x), dtype=float)
        with np.errstate(invalid="ignore"):
            xm = np.where(np.isneginf(x), 0.0, x * m)
            c12 = np.where(np.isneginf(x), 0.0, t1 - m - xm * m)
        return _out(c12), _out(t2 - (1.0 + xm) ** 2)

    # -- misc ----------------------------------------------------------------
    @property
    def fisher_information(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Normal(ErrorFamily):
    kind = "normal"

    @property
    def spec(self):
        return "normal"

    @property
    def fisher_information(self):
        return 1.0

    def _pdf(self, x):
        return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)

    def _cdf(self, x):
        return special.ndtr(x)

    def _log_cdf(self, x):
        return special.log_ndtr(x)

    def _lower_quantile(self, t):
        return special.ndtri(t)

    def _score(self, x):
        return x

    def _cond_mean(self, x):
        # Mills ratio via the scaled complementary error function
        with np.errstate(over="ignore"):
            return _SQRT_2_OVER_PI / special.erfcx(x / math.sqrt(2.0))

    def _cond_var(self, x):
        m = self._cond_mean(x)
        with np.errstate(invalid="ignore"):
            v = 1.0 - m * (m - x)
        return np.where(np.isneginf(x), 1.0, v)

    def scale_moments(self, x):
        x = np.asarray(x, dtype=float)
        m = self._cond_mean(x)
        with np.errstate(invalid="ignore"):
            e3 = np.where(np.isneginf(x), 0.0, (x * x + 2.0) * m)
            e4 = np.where(np.isneginf(x), 3.0, (x**3 + 3.0 * x) * m + 3.0)
        return _out(e3), _out(e4)


@dataclass(frozen=True)
class Logistic(ErrorFamily):
    kind = "logistic"

    @property
    def spec(self):
        return "logistic"

    @property
    def fisher_information(self):
        return 1.0 / 3.0

    def _pdf(self, x):
        return special.expit(x) * special.expit(-x)

    def _cdf(self, x):
        return special.expit(x)

    def _log_cdf(self, x):
        return special.log_expit(x)

    def _lower_quantile(self, t):
        return special.logit(t)

    def _score(self, x):
        return np.tanh(0.5 * x)

    def _cond_mean(self, x):
        return special.expit(x)

    def _cond_var(self, x):
        s = special.expit(-x)
        return s * s / 3.0

    def scale_moments(self, x):
        x = np.asarray(x, dtype=float)
        u = special.expit(-x)
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = -_logistic_i1(u) / u
            t2 = _logistic_i2(u) / u
        return _out(t1), _out(t2)


def _logistic_i1(u):
    """int_0^u logit(v) (1 - 2v)^2 dv."""
    u = np.asarray(u, dtype=float)
    w = np.minimum(u, 1.0 - u)  # integral is symmetric: I1(u) = I1(1 - u)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = w * (4.0 * w * w - 6.0 * w + 3.0) / 3.0
        val = p * special.logit(w) + 2.0 * w * w / 3.0 - 2.0 * w / 3.0 + np.log1p(-w) / 3.0
    return np.where(w <= 0.0, 0.0, val)


def _logistic_i2_lower(w):
    # valid for w <= 1/2, no catastrophic cancellation for small w
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = special.logit(w)
        p = w * (4.0 * w * w - 6.0 * w + 3.0) / 3.0
        q = 2.0 * w * (1.0 - w) / 3.0
        l1 = np.log1p(-w)
        # Li2(1 - w) - pi^2/6 by the reflection formula
        d = -np.log(w) * l1 - special.spence(1.0 - w)
        val = p * lg * lg - 2.0 * (q * lg - 2.0 * w / 3.0) - (2.0 / 3.0) * (d + 0.5 * l1 * l1)
    return np.where(w <= 0.0, 0.0, val)


_LOGISTIC_I2_TOTAL = float(2.0 * _logistic_i2_lower(np.array(0.5)))


def _logistic_i2(u):
    """int_0^u logit(v)^2 (1 - 2v)^2 dv (integrand symmetric about 1/2)."""
    u = np.asarray(u, dtype=float)
    lo = _logistic_i2_lower(np.minimum(u, 0.5))
    hi = _LOGISTIC_I2_TOTAL - _logistic_i2_lower(np.minimum(1.0 - u, 0.5))
    return np.where(u <= 0.5, lo, hi)


@dataclass(frozen=True)
class Laplace(ErrorFamily):
    """Double exponential with density ``(alpha/2) exp(-alpha |x|)``."""

    alpha: float = math.sqrt(2.0)
    kind = "laplace"

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise FamilySpecError(f"laplace rate must be positive, got {self.alpha!r}")

    @property
    def spec(self):
        return f"laplace:{self.alpha!r}"

    @property
    def fisher_information(self):
        return self.alpha**2

    def _pdf(self, x):
        return 0.5 * self.alpha * np.exp(-self.alpha * np.abs(x))

    def _cdf(self, x):
        half_tail = 0.5 * np.exp(-self.alpha * np.abs(x))
        return np.where(x < 0, half_tail, 1.0 - half_tail)

    def _log_cdf(self, x):
        ax = self.alpha * np.abs(x)
        return np.where(x < 0, -_LOG2 - ax, np.log1p(-0.5 * np.exp(-ax)))

    def _lower_quantile(self, t):
        with np.errstate(divide="ignore"):
            return np.log(2.0 * t) / self.alpha

    def _score(self, x):
        return self.alpha * np.sign(x)

    def logit_cdf(self, x):
        # for x < 0: alpha x - log(2 - e^{alpha x}), exact near the median
        x = np.asarray(x, dtype=float)
        ax = -self.alpha * np.abs(x)
        mag = ax - np.log1p(-np.expm1(ax))
        return _out(np.where(x < 0, mag, -mag))

    def from_logit(self, rho):
        # log(2 expit(rho)) = -log1p(expm1(-rho) / 2) keeps relative accuracy near the median
        rho = np.asarray(rho, dtype=float)
        with np.errstate(over="ignore"):
            mag = np.log1p(0.5 * np.expm1(np.abs(rho))) / self.alpha
        return _out(np.where(rho < 0, -mag, mag))

    def _mix(self, x):
        # p = P(x < e < 0 | e > x) for x < 0, zero otherwise
        neg = x < 0
        with np.errstate(over="ignore"):
            inner = -0.5 * np.expm1(self.alpha * np.minimum(x, 0.0))
        return np.where(neg, inner / self._cdf(-x), 0.0)

    def _cond_mean(self, x):
        return self.alpha * (1.0 - 2.0 * self._mix(x))

    def _cond_var(self, x):
        p = self._mix(x)
        return 4.0 * self.alpha**2 * p * (1.0 - p)

    def degenerate(self, x):
        return _out(np.asarray(x, dtype=float) >= 0.0)

    @property
    def degenerate_onset(self):
        return 0.0

    def scale_covariance(self, x):
        # Given e > x (x < 0) the law is a two-component mixture: with
        # probability p the part on (x, 0) where psi = -alpha, otherwise the
        # positive half where psi = alpha and phi - 1 ~ Exp(1).  The law of
        # total covariance then avoids subtracting raw moments.
        x = np.asarray(x, dtype=float)
        p = self._mix(x)
        q = 1.0 - p
        z = self.alpha * np.abs(np.minimum(x, 0.0))
        small = z < 1e-3
        zs = np.where(small, 1.0, z)
        with np.errstate(over="ignore", invalid="ignore"):
            # alpha |e| on the (x, 0) piece: mean 1 - z/expm1(z), var 1 - z^2 e^z / expm1(z)^2
            mean_a = np.where(small, z / 2 - z * z / 12, 1.0 - zs / np.expm1(zs))
            var_a = np.where(small, z * z / 12 - z**4 / 240,
                             1.0 - zs * zs * np.exp(zs) / np.expm1(zs) ** 2)
        var_a = np.where(np.isinf(zs), 1.0, var_a)
        mean_a = np.where(np.isinf(zs), 1.0, mean_a)
        gap = mean_a - 1.0  # E[phi | piece] - E[phi | positive half]
        c12 = -2.0 * self.alpha * p * q * gap
        c22 = p * var_a + q + p * q * gap * gap
        return _out(c12), _out(c22)

    def scale_moments(self, x):
        x = np.asarray(x, dtype=float)
        a = self.alpha
        ax = np.abs(x)
        s = self._cdf(-x)
        upper = 0.5 * np.exp(-a * ax)  # P(e > |x|)
        with np.errstate(invalid="ignore"):
            first = upper * (ax + 1.0 / a)
            second = np.where(
                x >= 0,
                upper * (x * x + 2.0 * ax / a + 2.0 / a**2),
                2.0 / a**2 - upper * (x * x + 2.0 * ax / a + 2.0 / a**2),
            )
        t1 = np.where(np.isneginf(x), 0.0, a * a * first / s)
        t2 = np.where(np.isneginf(x), 2.0, a * a * second / s)
        return _out(t1), _out(t2)


@dataclass(frozen=True)
class StudentT(ErrorFamily):
    """Student t with ``k`` degrees of freedom; ``k = 1`` is Cauchy."""

    k: int = 3
    kind = "student_t"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise FamilySpecError(f"degrees of freedom must be an integer >= 1, got {self.k!r}")

    @property
    def spec(self):
        return f"t:{int(self.k)}"

    @property
    def _c(self):
        k = self.k
        return math.exp(math.lgamma((k + 1) / 2) - math.lgamma(k / 2)) / math.sqrt(math.pi * k)

    @property
    def fisher_information(self):
        return (self.k + 1.0) / (self.k + 3.0)

    def _pdf(self, x):
        k = self.k
        return self._c * (1.0 + x * x / k) ** (-(k + 1) / 2)

    def _upper(self, x):
        # P(e > |x|) via the incomplete beta function
        k = self.k
        w = k / (k + x * x)
        return 0.5 * special.betainc(k / 2, 0.5, w)

    def _cdf(self, x):
        up = self._upper(x)
        return np.where(x < 0, up, 1.0 - up)

    def _log_cdf(self, x):
        up = self._upper(x)
        return np.where(x < 0, np.log(up), np.log1p(-up))

    def _lower_quantile(self, t):
        k = self.k
        with np.errstate(divide="ignore", invalid="ignore"):
            w = special.betaincinv(k / 2, 0.5, 2.0 * t)
            x = -np.sqrt(k * (1.0 / w - 1.0))
        x = np.where(t <= 0, -np.inf, x)
        return np.where(t >= 0.5, 0.0, x)

    def _score(self, x):
        k = self.k
        return (k + 1.0) * x / (k + x * x)

    def _half_integral(self, x, a, b):
        # int_|x|^inf y^(2a) (1 + y^2/k)^(-b) dy
        k = self.k
        w = k / (k + x * x)
        p, q = b - a - 0.5, a + 0.5
        return 0.5 * k ** (a + 0.5) * special.betainc(p, q, w) * special.beta(p, q)

    def _tail_even(self, x, a, b):
        half = self._half_integral(x, a, b)
        total = 2.0 * self._half_integral(np.zeros_like(x), a, b)
        return np.where(x >= 0, half, total - half)

    def _cond_second(self, x):
        k = self.k
        coef = ((k + 1.0) / k) ** 2 * self._c
        tail = coef * self._tail_even(x, 1, (k + 5) / 2)
        return np.where(np.isneginf(x), self.fisher_information, tail / self._cdf(-x))

    def _cond_var(self, x):
        m = self._cond_mean(x)
        return self._cond_second(x) - m * m

    def scale_moments(self, x):
        x = np.asarray(x, dtype=float)
        k = self.k
        b = (k + 5) / 2
        coef = ((k + 1.0) / k) ** 2 * self._c
        s = self._cdf(-x)
        u = 1.0 + x * x / k
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            # odd integrand: int_x^inf = int_|x|^inf
            odd = 0.5 * k * k * (u ** (2 - b) / (b - 2) - u ** (1 - b) / (b - 1))
            t1 = np.where(np.isneginf(x), 0.0, coef * odd / s)
            even = coef * self._tail_even(x, 2, b)
            total = 2.0 * coef * self._half_integral(np.zeros_like(x), 2, b)
            t2 = np.where(np.isneginf(x), total, even / s)
        return _out(t1), _out(t2)


def parse_family(spec: str | ErrorFamily) -> ErrorFamily:
    """Parse ``normal``, ``logistic``, ``laplace:<alpha>`` or ``t:<k>``."""
    if isinstance(spec, ErrorFamily):
        return spec
    text = str(spec).strip().lower()
    name, _, arg = text.partition(":")
    if name == "normal" and not arg:
        return Normal()
    if name == "logistic" and not arg:
        return Logistic()
    if name == "laplace" and arg:
        try:
            alpha = float(arg)
        except ValueError:
            raise FamilySpecError(f"bad laplace rate in {spec!r}") from None
        return Laplace(alpha)
    if name in ("t", "student_t") and arg:
        try:
            k = int(arg)
        except ValueError:
            raise FamilySpecError(f"bad degrees of freedom in {spec!r}") from None
        return StudentT(k)
    raise FamilySpecError(
        f"unknown family spec {spec!r}; expected normal, logistic, laplace:<alpha> or t:<k>"
    )


def family_eval(family: ErrorFamily, x: float) -> FamilyValues:
    """Density, distribution function and location score at a single point."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x!r}")
    return FamilyValues(family.pdf(x), family.cdf(x), family.score(x))


def quantile(family: ErrorFamily, t: float) -> float:
    t = float(t)
    if not 0.0 < t < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {t!r}")
    return family.quantile(t)


def tail_functionals(family: ErrorFamily, x: float) -> TailFunctionals:
    x = float(x)
    if math.isnan(x) or x == math.inf:
        raise DomainError(f"x must be finite or -inf, got {x!r}")
    s = family.sf(x)
    if s < TAIL_LIMIT:
        raise TailOverflowError(f"survival {s:.3g} at x={x!r} is below {TAIL_LIMIT:g}", point=x)
    m = family.cond_mean(x)
    v = family.cond_var(x)
    return TailFunctionals(
        x=x,
        survival=s,
        density_at=family.pdf(x),
        sigma2=s * (v + m * m),
        cond_mean=m,
        cond_var=v,
    )
