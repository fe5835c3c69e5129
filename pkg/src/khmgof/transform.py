"""The incomplete information matrix, its (generalized) inverse and the
martingale transform of the residual empirical process.

Notation.  ``h(x) = (1, psi(x))`` is the augmented location score, or
``(1, psi(x), 1 + x psi(x))`` when the scale is estimated as well.  For
``t = F(x)`` the matrix ``Gamma_t = int_x^inf h h^T dF`` is factored as

    Gamma_t = S * L diag(1, C) L^T,    L = [[1, 0], [mu, I]],

with ``S = 1 - t`` and ``mu``, ``C`` the conditional mean and covariance of
the non-constant score coordinates given ``e > x``.  Working with ``(S, mu,
C)`` instead of the raw entries avoids forming ``det(Gamma_t)``, which decays
like ``(1 - t)^4`` or faster, and makes the rank-deficient case (a constant
tail score, as for the Laplace law) a matter of ``C`` having a zero
direction.  ``L^{-T} diag(1, C^+) L^{-1} / S`` is then a generalized inverse
of ``Gamma_t``; on the image of ``Gamma_t`` every generalized inverse gives
the same bilinear form, which is all the transform ever needs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from . import kernels
from .errors import DomainError, IllConditionedError, TailOverflowError
from .families import TAIL_LIMIT, ErrorFamily, parse_family
from .paths import ProcessPath
from .quadrature import segment_integrals

__all__ = [
    "GammaMatrix",
    "CumulantTable",
    "PointMeasure",
    "InformationColumn",
    "score_vector",
    "gamma_matrix",
    "gamma_inner_solve",
    "weighted_norm",
    "cumulant_table",
    "transform_path",
    "scale_transform_path",
    "transform_values",
    "K_direct",
    "RHO_MIN",
    "T_CLAMP",
]

# integration runs in rho = logit(t); below RHO_MIN the integrand is negligible
RHO_MIN = -40.0
# upper integration limit near t = 1 (the kernel diverges logarithmically there)
T_CLAMP = 1.0 - 1e-10
RHO_CLAMP = math.log(T_CLAMP / (1.0 - T_CLAMP))
# relative eigenvalue cut for the conditional correlation matrix
EIG_RTOL = 1e-12

_QUAD_RTOL = 1e-10
_QUAD_ATOL = 1e-12


# ---------------------------------------------------------------------------
# scores and conditional tail moments
# ---------------------------------------------------------------------------

def _check_dim(dim):
    if dim not in (2, 3):
        raise ValueError(f"score dimension must be 2 or 3, got {dim!r}")


def score_vector(family: ErrorFamily, x, dim: int = 2, sigma: Optional[float] = None):
    """``h(x)`` (shape ``(..., dim)``); with ``sigma`` the non-constant
    coordinates are divided by it."""
    _check_dim(dim)
    x = np.asarray(x, dtype=float)
    psi = np.asarray(family.score(x), dtype=float)
    cols = [np.ones_like(psi), psi]
    if dim == 3:
        with np.errstate(invalid="ignore"):
            cols.append(np.where(np.isinf(x), 1.0, 1.0 + x * psi))
    h = np.stack(cols, axis=-1)
    if sigma is not None:
        h[..., 1:] /= float(sigma)
    return h


@dataclass
class _TailState:
    survival: np.ndarray  # (N,)
    mu: np.ndarray  # (N, k)
    cov: np.ndarray  # (N, k, k)
    drop: np.ndarray  # (N, k) coordinates with zero conditional variance


def _tail_state(family, x, dim, survival=None):
    """Conditional moments of the non-constant score coordinates on ``e > x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if survival is None:
        survival = np.atleast_1d(np.asarray(family.sf(x), dtype=float))
    neginf = np.isneginf(x)
    m = np.atleast_1d(np.asarray(family.cond_mean(x), dtype=float))
    v = np.atleast_1d(np.asarray(family.cond_var(x), dtype=float))
    m = np.where(neginf, 0.0, m)
    v = np.where(neginf, family.fisher_information, v)
    degenerate = np.atleast_1d(np.asarray(family.degenerate(x), dtype=bool))
    if dim == 2:
        mu = m[:, None]
        cov = v[:, None, None]
        drop = (degenerate | (v == 0.0))[:, None]
    else:
        c12, c22 = family.scale_covariance(x)
        c12 = np.atleast_1d(np.asarray(c12, dtype=float))
        c22 = np.atleast_1d(np.asarray(c22, dtype=float))
        # E[phi | e > x] = 1 + E[e psi | e > x] = 2 + x m (integration by parts)
        with np.errstate(invalid="ignore"):
            xm = np.where(neginf, 0.0, x * m)
        mu = np.stack([m, 2.0 + xm], axis=-1)
        cov = np.empty((x.size, 2, 2))
        cov[:, 0, 0] = v
        cov[:, 0, 1] = cov[:, 1, 0] = c12
        cov[:, 1, 1] = c22
        drop = np.stack([degenerate | (v == 0.0), c22 == 0.0], axis=-1)
    bad = ~np.isfinite(cov).all(axis=(1, 2)) | ~np.isfinite(mu).all(axis=1)
    neg = (np.diagonal(cov, axis1=1, axis2=2) < 0.0) & ~drop
    if bad.any() or neg.any():
        where = x[np.argmax(bad | neg.any(axis=1))]
        raise IllConditionedError(
            f"conditional score covariance is not positive semidefinite at x={where!r}"
        )
    return _TailState(survival, mu, cov, drop)


def _cond_pinv(cov, drop):
    """Batched generalized inverse of conditional covariances.

    The matrix is first reduced to a correlation matrix so that the eigenvalue
    cut is scale free (the tail variance of a score coordinate can be tiny
    while still carrying information).  Dropped coordinates are treated as
    exactly constant.  Returns ``(pinv, kernel_basis, deficient)`` where
    ``kernel_basis`` is ``(N, k, k)`` with zero columns for non-kernel
    directions.
    """
    n, k, _ = cov.shape
    diag = np.diagonal(cov, axis1=1, axis2=2)
    keep = ~drop & (diag > 0.0)
    inv_sd = np.zeros_like(diag)
    inv_sd[keep] = 1.0 / np.sqrt(diag[keep])
    corr = cov * inv_sd[:, :, None] * inv_sd[:, None, :]
    if k == 1:
        w = corr[:, :, 0]
        vecs = np.ones((n, 1, 1))
    else:
        w, vecs = np.linalg.eigh(corr)
    top = np.max(np.abs(w), axis=1, keepdims=True)
    live = w > EIG_RTOL * np.maximum(top, np.finfo(float).tiny)
    winv = np.where(live, 1.0 / np.where(live, w, 1.0), 0.0)
    rinv = np.einsum("nij,nj,nkj->nik", vecs, winv, vecs)
    pinv = rinv * inv_sd[:, :, None] * inv_sd[:, None, :]
    # kernel directions of cov, mapped back from correlation coordinates
    scale = np.where(keep, inv_sd, 1.0)
    kern = np.where(live[:, None, :], 0.0, vecs * scale[:, :, None])
    deficient = ~live.all(axis=1)
    return pinv, kern, deficient


def _image_projector(mu, kern):
    """Orthogonal projector onto the image of ``Gamma`` (batched).

    The kernel of ``L diag(1, C) L^T`` is spanned by ``(-mu^T u, u)`` with
    ``u`` in the kernel of ``C``.
    """
    n, k = mu.shape
    full = np.concatenate([-np.einsum("nj,njc->nc", mu, kern)[:, None, :], kern], axis=1)
    gram_pinv = np.linalg.pinv(np.einsum("nic,nid->ncd", full, full))
    eye = np.eye(k + 1)
    return eye - np.einsum("nic,ncd,njd->nij", full, gram_pinv, full)


# ---------------------------------------------------------------------------
# Gamma_t and its inverse
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaMatrix:
    """``Gamma_t`` with the factorization used for every solve.

    ``alpha`` is the conditional mean of the location score (the constant tail
    score when ``rank_deficient``).  ``condition`` is the spectral condition
    number of ``entries / (1 - t)``, kept for diagnostics only.
    """

    t: float
    entries: np.ndarray
    rank_deficient: bool
    alpha: Optional[float]
    survival: float
    cond_mean: np.ndarray
    cond_cov: np.ndarray
    condition: float = field(default=math.nan, compare=False)
    _pinv: np.ndarray = field(default=None, repr=False, compare=False)
    _projector: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def dim(self):
        return self.entries.shape[0]

    @classmethod
    def _build(cls, t, survival, mu, cov, drop):
        pinv, kern, deficient = _cond_pinv(cov[None], drop[None])
        deficient = bool(deficient[0])
        proj = _image_projector(mu[None], kern)[0] if deficient else None
        d = mu.size + 1
        scaled = np.empty((d, d))
        scaled[0, 0] = 1.0
        scaled[0, 1:] = scaled[1:, 0] = mu
        scaled[1:, 1:] = cov + np.outer(mu, mu)
        ev = np.linalg.eigvalsh(scaled)
        cond = float(ev[-1] / ev[0]) if ev[0] > 0 else math.inf
        return cls(
            t=float(t),
            entries=survival * scaled,
            rank_deficient=deficient,
            alpha=float(mu[0]),
            survival=float(survival),
            cond_mean=mu,
            cond_cov=cov,
            condition=cond,
            _pinv=pinv[0],
            _projector=proj,
        )

    @classmethod
    def from_entries(cls, entries, t=None, rtol=1e-12):
        """Wrap a raw symmetric PSD matrix (its ``[0, 0]`` entry is ``1 - t``)."""
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise ValueError("entries must be a square matrix of size >= 2")
        if not np.allclose(a, a.T, rtol=1e-12, atol=0.0):
            raise ValueError("entries must be symmetric")
        s = a[0, 0]
        if not s > 0:
            raise DomainError("entries[0, 0] = 1 - t must be positive")
        mu = a[0, 1:] / s
        cov = a[1:, 1:] / s - np.outer(mu, mu)
        cov = 0.5 * (cov + cov.T)
        diag = np.diag(cov)
        drop = diag <= rtol * (1.0 + mu * mu)
        cov[drop, :] = 0.0
        cov[:, drop] = 0.0
        return cls._build(1.0 - s if t is None else t, s, mu, cov, drop)


def gamma_matrix(family, t: float, *, sigma: Optional[float] = None, dim: Optional[int] = None) -> GammaMatrix:
    """``Gamma_t``; 3x3 scale-augmented when ``sigma`` (or ``dim=3``) is given.

    With ``sigma`` the non-constant score coordinates are divided by it, i.e.
    the entries are ``D Gamma_t D`` with ``D = diag(1, 1/sigma, 1/sigma)``.
    """
    family = parse_family(family)
    if dim is None:
        dim = 2 if sigma is None else 3
    _check_dim(dim)
    t = float(t)
    if not (0.0 <= t < 1.0 - TAIL_LIMIT):
        raise DomainError(f"t must lie in [0, 1 - {TAIL_LIMIT:g}), got {t!r}")
    if sigma is not None and not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    x = -math.inf if t == 0.0 else family.quantile(t)
    st = _tail_state(family, x, dim, survival=np.array([1.0 - t]))
    mu, cov, drop = st.mu[0], st.cov[0], st.drop[0]
    if sigma is not None:
        mu = mu / sigma
        cov = cov / sigma**2
    return GammaMatrix._build(t, 1.0 - t, mu, cov, drop)


def gamma_inner_solve(g: GammaMatrix, gamma_t, b) -> float:
    """``gamma_t^T Gamma_t^{-1} b`` for ``b`` in the image of ``Gamma_t``.

    Rank-deficient matrices use the Moore-Penrose inverse; in the 2x2 case
    this is ``gamma^T b / ((1 - t)(1 + alpha^2))``.
    """
    gam = np.asarray(gamma_t, dtype=float)
    b = np.asarray(b, dtype=float)
    if gam.shape != (g.dim,) or b.shape != (g.dim,):
        raise ValueError(f"vectors must have length {g.dim}")
    if g.rank_deficient:
        gam = g._projector @ gam
        b = g._projector @ b
    mu = g.cond_mean
    lhs = gam[1:] - gam[0] * mu
    rhs = b[1:] - b[0] * mu
    return float((gam[0] * b[0] + lhs @ g._pinv @ rhs) / g.survival)


def weighted_norm(family, t: float) -> float:
    """``gamma(t)^T Gamma_t^{-1} gamma(t)`` for the location score."""
    family = parse_family(family)
    g = gamma_matrix(family, t)
    if g.rank_deficient:
        return 1.0 / (1.0 - g.t)
    x = -math.inf if g.t == 0.0 else family.quantile(g.t)
    gam = score_vector(family, x)
    return gamma_inner_solve(g, gam, gam)


# ---------------------------------------------------------------------------
# cumulative kernel
# ---------------------------------------------------------------------------

def _nodes_to_x(family, rho):
    t = special.expit(rho)
    s = special.expit(-rho)
    return t, s, np.asarray(family.from_logit(rho), dtype=float)


def _kernel_integrand(family, dim, rho, projector=None):
    """``dG/drho = t (1 - mu^T r, r)`` with ``r = C^+ (h~ - mu)``.

    Nodes where the tail score is degenerate are projected onto the image of
    ``Gamma_t``; a fixed ``projector`` is applied at every node instead when
    given (used to carry the kernel across a degeneracy onset).
    """
    rho = np.asarray(rho, dtype=float)
    t, s, x = _nodes_to_x(family, rho)
    st = _tail_state(family, x, dim, survival=s)
    h = score_vector(family, x, dim)
    pinv, kern, deficient = _cond_pinv(st.cov, st.drop)
    r = np.einsum("nij,nj->ni", pinv, h[:, 1:] - st.mu)
    out = np.empty((rho.size, dim))
    out[:, 0] = 1.0 - np.einsum("ni,ni->n", st.mu, r)
    out[:, 1:] = r
    if projector is not None:
        out = out @ projector.T
    elif deficient.any():
        p = _image_projector(st.mu[deficient], kern[deficient])
        out[deficient] = np.einsum("nij,nj->ni", p, out[deficient])
    return out * t[:, None]


def _onset_projector(family, dim):
    x0 = family.degenerate_onset
    st = _tail_state(family, np.array([x0]), dim)
    _, kern, deficient = _cond_pinv(st.cov, st.drop)
    if not deficient[0]:
        raise IllConditionedError("degeneracy onset without a rank drop")
    return _image_projector(st.mu, kern)[0]


@dataclass(frozen=True)
class CumulantTable:
    """``G(x) = int_{y <= x} Gamma_{F(y)}^{-1} h(y) dF(y)`` at sorted points.

    For families with a degenerate tail the values at and beyond the onset
    are the projections onto the image of ``Gamma`` (the only part ever
    paired with a score vector there).
    """

    family: ErrorFamily
    points: np.ndarray
    values: np.ndarray
    dim: int = 2
    clamped: np.ndarray = field(default=None, repr=False)
    error_bound: float = 0.0

    def __len__(self):
        return self.points.size


def cumulant_table(family, points, dim: int = 2) -> CumulantTable:
    """Cumulative kernel at ``points`` (sorted, ties allowed)."""
    family = parse_family(family)
    _check_dim(dim)
    pts = np.asarray(points, dtype=float).ravel()
    if pts.size == 0:
        return CumulantTable(family, pts, np.zeros((0, dim)), dim, np.zeros(0, bool))
    if not np.all(np.isfinite(pts)):
        raise DomainError("cumulant points must be finite")
    if np.any(np.diff(pts) < 0):
        raise DomainError("cumulant points must be sorted")
    sf = np.asarray(family.sf(pts), dtype=float)
    if sf[-1] < TAIL_LIMIT:
        bad = float(pts[np.argmax(sf < TAIL_LIMIT)])
        raise TailOverflowError(
            f"point {bad!r} is too far in the right tail (survival {family.sf(bad):.3g} < {TAIL_LIMIT:g})",
            point=bad,
        )
    uniq, inverse = np.unique(pts, return_inverse=True)
    rho = np.asarray(family.logit_cdf(uniq), dtype=float)
    clamped = rho > RHO_CLAMP
    rho = np.clip(rho, RHO_MIN, RHO_CLAMP)

    def integrand(r):
        return _kernel_integrand(family, dim, r)

    values = np.zeros((uniq.size, dim))
    err_total = 0.0
    x0 = family.degenerate_onset
    # points within 1e-300 of the onset count as on it (the tail variance underflows)
    pre = uniq < x0 - 1e-300 if x0 is not None else np.ones(uniq.size, bool)

    if pre.any():
        edges = np.concatenate([[RHO_MIN], rho[pre]])
        if x0 is not None:
            # the kernel grows like log(rho0 - rho) just below the onset;
            # geometric breakpoints keep each segment well resolved
            gap = float(family.logit_cdf(x0)) - edges[-1]
            if 0.0 < gap < 1e-3:
                k = np.arange(3, int(math.ceil(-math.log10(gap))) + 1)
                edges = np.concatenate([edges, float(family.logit_cdf(x0)) - 10.0 ** -k.astype(float)])
        edges = np.unique(edges)
        seg, err = segment_integrals(integrand, edges, rtol=_QUAD_RTOL, atol=_QUAD_ATOL)
        csum = np.vstack([np.zeros((1, dim)), np.cumsum(seg.reshape(-1, dim), axis=0)])
        values[pre] = csum[np.searchsorted(edges, rho[pre])]
        err_total += float(err.sum())
    if not pre.all():
        rho0 = float(family.logit_cdf(x0))
        proj = _onset_projector(family, dim)
        off, err = segment_integrals(
            lambda r: _kernel_integrand(family, dim, r, projector=proj),
            [RHO_MIN, rho0], rtol=_QUAD_RTOL, atol=_QUAD_ATOL,
        )
        err_total += float(err.sum())
        edges = np.concatenate([[rho0], rho[~pre]])
        seg, err = segment_integrals(integrand, edges, rtol=_QUAD_RTOL, atol=_QUAD_ATOL)
        values[~pre] = off[0] + np.cumsum(seg, axis=0)
        err_total += float(err.sum())
    return CumulantTable(
        family=family,
        points=pts,
        values=values[inverse],
        dim=dim,
        clamped=clamped[inverse],
        error_bound=err_total,
    )


# ---------------------------------------------------------------------------
# transformed processes
# ---------------------------------------------------------------------------

def _residual_array(residuals):
    e = getattr(residuals, "residuals", residuals)
    e = np.asarray(e, dtype=float).ravel()
    if e.size == 0:
        raise DomainError("empty residual set")
    if not np.all(np.isfinite(e)):
        raise DomainError("residuals must be finite")
    return e


def _transform(family, e, dim, name):
    n = e.size
    uniq, counts = np.unique(e, return_counts=True)
    table = cumulant_table(family, uniq, dim)
    H = score_vector(family, uniq, dim)
    G = table.values
    values, left = kernels.transform_sums(counts.astype(float), H, G)
    root = math.sqrt(n)

    def exact(x):
        return transform_values(family, e, x, dim=dim)

    return ProcessPath(
        name=name,
        points=uniq,
        values=values / root,
        left_values=left / root,
        n=n,
        kind="w",
        family=family.spec,
        exact=exact,
    )


def transform_path(residuals, family) -> ProcessPath:
    """``w_n`` as a step path with jumps at the distinct residuals."""
    family = parse_family(family)
    return _transform(family, _residual_array(residuals), 2, "w_n")


def scale_transform_path(residuals, sigma_hat: float, family) -> ProcessPath:
    """``w~_n`` for standardized residuals ``e / sigma_hat`` with the
    scale-augmented score.  The path lives on the standardized axis."""
    family = parse_family(family)
    sigma_hat = float(sigma_hat)
    if not (sigma_hat > 0 and math.isfinite(sigma_hat)):
        raise DomainError(f"sigma_hat must be positive, got {sigma_hat!r}")
    e = _residual_array(residuals) / sigma_hat
    return _transform(family, e, 3, "w_tilde_n")


def transform_values(family, residuals, x, dim: int = 2):
    """Evaluate the transformed process at arbitrary ``x``, straight from

        w(x) = n^{-1/2} sum_i [1{e_i <= x} - h(e_i)^T G(min(x, e_i))].
    """
    family = parse_family(family)
    e = _residual_array(residuals)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = e.size
    es = np.sort(e)
    order = np.argsort(x)
    xs = x[order]
    grid = np.concatenate([es, xs])
    table = cumulant_table(family, np.sort(grid), dim)
    gmap = dict(zip(table.points.tolist(), table.values))
    H = score_vector(family, es, dim)
    G_e = np.array([gmap[v] for v in es.tolist()])
    hg = np.einsum("ij,ij->i", H, G_e)
    out = np.empty(xs.size)
    for k, xv in enumerate(xs.tolist()):
        below = es <= xv
        Gx = gmap[xv]
        out[k] = (np.sum(1.0 - hg[below]) - H[~below].sum(axis=0) @ Gx) / math.sqrt(n)
    res = np.empty_like(out)
    res[order] = out
    return res


# ---------------------------------------------------------------------------
# direct double-integral oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointMeasure:
    """A finite signed measure ``sum_i weights[i] delta_{atoms[i]}``."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float).ravel()
        w = np.broadcast_to(np.asarray(self.weights, dtype=float), a.shape)
        order = np.argsort(a, kind="stable")
        object.__setattr__(self, "atoms", a[order])
        object.__setattr__(self, "weights", w[order].copy())

    @classmethod
    def empirical(cls, sample):
        a = np.asarray(sample, dtype=float).ravel()
        return cls(a, np.full(a.size, 1.0 / a.size))

    def breakpoints(self):
        return self.atoms

    def tail(self, family, y, state, dim, sigma):
        """``int_{(y, inf)} h dnu`` at every ``y`` (shape ``(len(y), dim)``)."""
        h = self.weights[:, None] * score_vector(family, self.atoms, dim, sigma)
        suffix = np.vstack([np.cumsum(h[::-1], axis=0)[::-1], np.zeros((1, dim))])
        idx = np.searchsorted(self.atoms, y, side="right")
        return suffix[idx]


@dataclass(frozen=True)
class InformationColumn:
    """The measure ``dH_j = h_j dF``; for ``j = 0`` this is ``F`` itself and
    for ``j = 1`` the signed measure with distribution function ``-f``.

    Its tail integral ``int_y^inf h dH_j`` is column ``j`` of ``Gamma_{F(y)}``.
    """

    column: int

    def breakpoints(self):
        return np.zeros(0)

    def tail(self, family, y, state, dim, sigma):
        s, mu, cov = state
        j = self.column
        col = np.empty((y.size, dim))
        if j == 0:
            col[:, 0] = 1.0
            col[:, 1:] = mu
        else:
            col[:, 0] = mu[:, j - 1]
            col[:, 1:] = cov[:, :, j - 1] + mu * mu[:, j - 1:j]
        return s[:, None] * col


def _direct_integrand(family, nu, dim, sigma, t):
    """``h(y)^T Gamma_t^{-1} int_y^inf h dnu`` at ``y = F^{-1}(t)`` (batched)."""
    t = np.asarray(t, dtype=float)
    s = 1.0 - t
    y = np.asarray(family.quantile(t), dtype=float)
    st = _tail_state(family, y, dim, survival=s)
    mu, cov = st.mu, st.cov
    if sigma is not None:
        mu = mu / sigma
        cov = cov / sigma**2
    gam = score_vector(family, y, dim, sigma)
    b = nu.tail(family, y, (s, mu, cov), dim, sigma)
    pinv, kern, deficient = _cond_pinv(cov, st.drop)
    if deficient.any():
        p = _image_projector(mu[deficient], kern[deficient])
        gam[deficient] = np.einsum("nij,nj->ni", p, gam[deficient])
        b[deficient] = np.einsum("nij,nj->ni", p, b[deficient])
    lhs = gam[:, 1:] - gam[:, :1] * mu
    rhs = b[:, 1:] - b[:, :1] * mu
    quad_form = np.einsum("ni,nij,nj->n", lhs, pinv, rhs)
    return (gam[:, 0] * b[:, 0] + quad_form) / s


def K_direct(family, x: float, nu, *, dim: int = 2, sigma: Optional[float] = None,
             rtol: float = 1e-11, atol: float = 1e-13):
    """Compensator ``K(x, nu)`` by direct double integration (slow oracle).

    ``nu`` is a :class:`PointMeasure`, an :class:`InformationColumn`, or a
    sequence of them (then a vector is returned).  The inner integral is an
    exact sum over atoms; the outer one is adaptive Gauss-Kronrod over
    ``t = F(y)`` with breakpoints at the atoms and at any degeneracy onset.
    The integrand pairs ``h`` with ``Gamma_t^{-1} b`` at every node, so no
    cumulative kernel is involved.
    """
    family = parse_family(family)
    _check_dim(dim)
    if isinstance(nu, (list, tuple)):
        return np.array([K_direct(family, x, m, dim=dim, sigma=sigma, rtol=rtol, atol=atol)
                         for m in nu])
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("x must be finite")
    if family.sf(x) < TAIL_LIMIT:
        raise TailOverflowError(f"x={x!r} is too far in the right tail", point=x)
    if sigma is not None and not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    upper = min(family.cdf(x), T_CLAMP)
    brk = [0.0, upper]
    atoms = np.asarray(nu.breakpoints(), dtype=float)
    if atoms.size:
        brk.extend(np.atleast_1d(family.cdf(atoms[atoms < x])).tolist())
    if family.degenerate_onset is not None and family.degenerate_onset < x:
        brk.append(family.cdf(family.degenerate_onset))
    brk = np.unique(np.clip(brk, 0.0, upper))
    if brk.size < 2:
        return 0.0
    seg, _ = segment_integrals(
        lambda t: _direct_integrand(family, nu, dim, sigma, t), brk, rtol=rtol, atol=atol
    )
    return float(seg.sum())
