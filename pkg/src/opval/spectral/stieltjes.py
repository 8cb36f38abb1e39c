"""Numerical side of the C (+) C example: the Stieltjes branch of the G curve,
the density of a*a by inversion, atoms and small-w asymptotics.

The curve is 8G^4w^2 - 20G^3w^2 + 8G^2w(2w+1) + G(-4w^2 - 12w + 1) + 4w = 0.
The Stieltjes branch is singled out by G ~ 1/w at infinity; every evaluation
seeds there and follows a ray to its target with predictor-corrector steps.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SUPPORT_EDGE",
    "ASYMPTOTE_A",
    "ASYMPTOTE_B",
    "BranchTrackingError",
    "quartic_coeffs",
    "quartic_residual",
    "quartic_roots",
    "stieltjes_G",
    "DensitySamples",
    "default_grid",
    "density",
    "density_asymptote",
    "integrate_moments",
    "atom_profile",
    "atom_mass",
    "g1_expansion",
    "g2_expansion",
    "PuiseuxReport",
    "check_puiseux",
    "write_csv",
    "write_svg",
]

SUPPORT_EDGE = 4.793563823406564       # largest real root of 16w^4-160w^3+540w^2-680w+27
ASYMPTOTE_A = math.sqrt(3) / (4 * math.pi)
ASYMPTOTE_B = math.sqrt(3) / (3 * math.pi)

_SEED = 1e6
_COLLISION_TOL = 1e-8


class BranchTrackingError(RuntimeError):
    """Continuation could not separate the tracked root from a neighbour."""


def quartic_coeffs(w):
    """Coefficients (a4, a3, a2, a1, a0) in G, each an array shaped like w."""
    w = np.asarray(w, dtype=complex)
    w2 = w * w
    return 8 * w2, -20 * w2, 16 * w2 + 8 * w, -4 * w2 - 12 * w + 1, 4 * w


def _eval(G, w):
    a4, a3, a2, a1, a0 = quartic_coeffs(w)
    P = (((a4 * G + a3) * G + a2) * G + a1) * G + a0
    PG = ((4 * a4 * G + 3 * a3) * G + 2 * a2) * G + a1
    # dP/dw
    Pw = (((16 * w * G - 40 * w) * G + 32 * w + 8) * G - 8 * w - 12) * G + 4
    scale = (np.abs(a4) * np.abs(G) ** 4 + np.abs(a3) * np.abs(G) ** 3 + np.abs(a2) * np.abs(G) ** 2
             + np.abs(a1) * np.abs(G) + np.abs(a0))
    return P, PG, Pw, scale


def quartic_residual(G, w):
    """|P(G, w)| divided by the sum of the absolute values of its terms."""
    P, _, _, scale = _eval(np.asarray(G, dtype=complex), np.asarray(w, dtype=complex))
    return np.abs(P) / np.where(scale == 0, 1.0, scale)


def quartic_roots(w: complex) -> np.ndarray:
    """All four roots in G at fixed w, companion eigenvalues plus Newton polish."""
    w = complex(w)
    if w == 0:
        raise ValueError("leading coefficient 8w^2 vanishes at w = 0")
    coeffs = [complex(c) for c in quartic_coeffs(w)]
    roots = np.roots(coeffs).astype(complex)
    for _ in range(3):
        P, PG, _, _ = _eval(roots, np.full(4, w))
        ok = PG != 0
        roots = np.where(ok, roots - np.where(ok, P / np.where(ok, PG, 1), 0), roots)
    return roots


def _newton(G, w, iters=30, tol=1e-14):
    """Newton on P(., w); returns (G, converged mask).

    A point stops moving once its own step is below tolerance, so the result
    does not depend on which other points share the array.
    """
    G = np.array(G, dtype=complex)
    w = np.broadcast_to(np.asarray(w, dtype=complex), G.shape)
    conv = np.zeros(G.shape, dtype=bool)
    for _ in range(iters):
        act = ~conv
        if not act.any():
            break
        P, PG, _, _ = _eval(G[act], w[act])
        PG = np.where(PG == 0, 1e-300, PG)
        step = P / PG
        G[act] = G[act] - step
        conv[act] = np.abs(step) <= tol * (1 + np.abs(G[act]))
    return G, conv


def _track(base, direction, y_target):
    """Follow w(y) = base + direction * y from y = _SEED down to y_target.

    Steps are geometric in y with a per-point ratio; a step is rejected and
    the ratio square-rooted when Newton fails to converge or lands far from
    the Euler predictor (a sign of jumping to another sheet).
    """
    base = np.asarray(base, dtype=complex)
    direction = np.asarray(direction, dtype=complex)
    y_target = np.asarray(y_target, dtype=float)
    y = np.full(base.shape, _SEED)
    w = base + direction * y
    G, _ = _newton(1.0 / w, w)
    ratio = np.full(base.shape, 0.5)
    done = y <= y_target
    near = np.zeros(base.shape, dtype=bool)
    for _ in range(200000):
        if done.all():
            break
        idx = np.nonzero(~done)[0]
        yi, Gi = y[idx], G[idx]
        y_new = np.maximum(y_target[idx], yi * ratio[idx])
        w_old = base[idx] + direction[idx] * yi
        w_new = base[idx] + direction[idx] * y_new
        _, PG, Pw, _ = _eval(Gi, w_old)
        dG = -Pw / np.where(PG == 0, 1e-300, PG)
        pred = Gi + dG * (w_new - w_old)
        Gc, conv = _newton(pred.copy(), w_new, iters=8)
        move = np.abs(Gc - Gi)
        corr = np.abs(Gc - pred)
        accept = conv & np.isfinite(Gc) & (corr <= 0.1 * move + 1e-12 * (1 + np.abs(Gc)))
        if not accept.all():
            bad = idx[~accept]
            r = np.sqrt(ratio[bad])
            if np.any(r > 1 - 1e-12):
                raise BranchTrackingError("step size underflow while tracking the Stieltjes branch")
            ratio[bad] = r
        good = idx[accept]
        y[good] = y_new[accept]
        G[good] = Gc[accept]
        ratio[good] = np.maximum(ratio[good] ** 2, 0.05)
        done[good] = y[good] <= y_target[good]
    else:
        raise BranchTrackingError("continuation did not reach its target")
    _, PG, _, scale = _eval(G, base + direction * y)
    near = np.abs(PG) * (1 + np.abs(G)) < _COLLISION_TOL * np.where(scale == 0, 1, scale)
    return G, near


def _paths(w):
    w = np.asarray(w, dtype=complex)
    base = np.zeros(w.shape, dtype=complex)
    direction = np.zeros(w.shape, dtype=complex)
    y = np.zeros(w.shape)
    up = w.imag > 0
    low = w.imag < 0
    real = ~(up | low)
    if np.any(real & (w.real >= 0) & (w.real <= SUPPORT_EDGE)):
        raise ValueError("G is evaluated on the support only from the upper half-plane; give Im w > 0")
    vert = up | low
    base[vert] = w.real[vert]
    direction[up] = 1j
    direction[low] = -1j
    y[vert] = np.abs(w.imag[vert])
    neg = real & (w.real < 0)
    pos = real & (w.real > SUPPORT_EDGE)
    direction[neg] = -1
    direction[pos] = 1
    y[neg | pos] = np.abs(w.real[neg | pos])
    return base, direction, y


def stieltjes_G(w, *, threads: int | None = None, return_flags: bool = False):
    """Stieltjes transform G(w) = int dmu(t)/(w - t) of a*a.

    ``w`` may be a scalar or an array.  Points with Im w != 0 are reached
    vertically from Re w +/- 10^6 i; real points (negative, or beyond the
    support edge) along the real axis from -/+ 10^6.  With ``return_flags``
    a boolean array marks results that ended within the collision tolerance
    of a double root.
    """
    scalar = np.ndim(w) == 0
    arr = np.atleast_1d(np.asarray(w, dtype=complex))
    base, direction, y = _paths(arr)
    n = arr.size
    workers = max(1, int(threads or 1))
    if workers == 1 or n < 2 * workers:
        G, near = _track(base, direction, y)
    else:
        chunks = np.array_split(np.arange(n), workers)
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda c: _track(base[c], direction[c], y[c]), chunks))
        G = np.concatenate([p[0] for p in parts])
        near = np.concatenate([p[1] for p in parts])
    # the real axis off the support: G is real there
    real = arr.imag == 0
    G = np.where(real, G.real + 0j, G)
    if scalar:
        return (complex(G[0]), bool(near[0])) if return_flags else complex(G[0])
    return (G, near) if return_flags else G


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensitySamples:
    t: np.ndarray
    rho: np.ndarray
    eps: float
    t_min: float
    t_max: float
    richardson: bool = True
    min_raw: float = 0.0          # most negative value before clamping

    def __post_init__(self):
        if self.t.ndim != 1 or self.t.shape != self.rho.shape:
            raise ValueError("grid and values must be 1-d of equal length")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("grid must be strictly increasing")


def default_grid(points: int = 2000, t_lo: float = 1e-4, t_hi: float = 4.8) -> np.ndarray:
    """Cube-graded grid t = u^3, dense near the t^(-2/3) singularity at 0."""
    if points < 2:
        raise ValueError("need at least two grid points")
    u = np.linspace(t_lo ** (1 / 3), t_hi ** (1 / 3), points)
    t = u ** 3
    t[0], t[-1] = t_lo, t_hi
    return t


def density(grid, eps: float = 1e-7, *, richardson: bool = True,
            threads: int | None = None, floor: float = 1e-9) -> DensitySamples:
    """rho(t) = -Im G(t + i eps)/pi on the grid.

    With ``richardson`` the linear-in-eps smoothing bias is removed by
    2 rho(eps/2) - rho(eps).  Values in [-floor, 0) are clamped to 0; anything
    more negative is kept in ``min_raw`` and raises.
    """
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if np.any(t <= 0):
        raise ValueError("grid must lie in (0, t_max]")
    if not (0 < eps <= 1e-3):
        raise ValueError(f"eps must be in (0, 1e-3], got {eps}")
    if richardson:
        w = np.concatenate([t + 1j * eps, t + 0.5j * eps])
        G = stieltjes_G(w, threads=threads)
        r1 = -G[: t.size].imag / math.pi
        r2 = -G[t.size:].imag / math.pi
        rho = 2 * r2 - r1
    else:
        rho = -stieltjes_G(t + 1j * eps, threads=threads).imag / math.pi
    min_raw = float(rho.min())
    if min_raw < -floor * max(1.0, float(np.abs(rho).max())):
        raise BranchTrackingError(f"negative density {min_raw:g}: branch tracking failed")
    rho = np.maximum(rho, 0.0)
    return DensitySamples(t, rho, float(eps), float(t[0]), float(t[-1]), richardson, min_raw)


def density_asymptote(t):
    """sqrt(3)/(4 pi) t^(-2/3) + sqrt(3)/(3 pi) t^(-1/3), the small-t density."""
    t = np.asarray(t, dtype=float)
    return ASYMPTOTE_A * t ** (-2 / 3) + ASYMPTOTE_B * t ** (-1 / 3)


def integrate_moments(samples: DensitySamples, orders=(0, 1, 2, 3)) -> dict:
    """int t^n rho dt: trapezoid on the samples plus the asymptote on (0, t_min]."""
    t, rho = samples.t, samples.rho
    delta = samples.t_min
    out = {}
    for n in orders:
        body = float(np.trapezoid(t ** n * rho, t)) if hasattr(np, "trapezoid") else float(np.trapz(t ** n * rho, t))
        p1, p2 = n + 1 / 3, n + 2 / 3
        head = ASYMPTOTE_A * delta ** p1 / p1 + ASYMPTOTE_B * delta ** p2 / p2
        out[n] = body + head
    return out


# ---------------------------------------------------------------------------
# atoms and asymptotics
# ---------------------------------------------------------------------------

def atom_profile(t0: float, eps_seq) -> list[tuple[float, float]]:
    """[(eps, eps * |G(t0 + i eps)|)] for each eps."""
    eps = np.asarray(list(eps_seq), dtype=float)
    if np.any(eps <= 0):
        raise ValueError("eps values must be positive")
    G = stieltjes_G(float(t0) + 1j * eps)
    return [(float(e), float(e * abs(g))) for e, g in zip(eps, G)]


def atom_mass(t0: float, eps_seq) -> float:
    """eps * |G(t0 + i eps)| at the smallest eps given.

    The mass of an atom at t0 is the limit of this quantity; without an atom
    it tends to 0 (like eps^(1/3) at 0 for this measure).
    """
    prof = atom_profile(t0, eps_seq)
    return min(prof)[1]


def g1_expansion(w):
    """-4w - 48w^2, the analytic branch through G = 0 at w = 0."""
    w = np.asarray(w, dtype=complex)
    return -4 * w - 48 * w * w


def g2_expansion(w):
    """-1/2 w^(-2/3) + 2/3 w^(-1/3) + 5/6 with the branch of w^(1/3) that is
    real and negative on the negative real axis (continued through Im w > 0)."""
    w = np.asarray(w, dtype=complex)
    r = np.abs(w)
    phi = np.angle(w)
    phi = np.where(phi <= 0, phi + 2 * np.pi, phi)      # (0, 2pi], pi on the negative axis
    c = r ** (1 / 3) * np.exp(1j * (phi + 2 * np.pi) / 3)
    return -0.5 / (c * c) + (2 / 3) / c + 5 / 6


@dataclass(frozen=True)
class PuiseuxReport:
    w: tuple
    G: tuple
    g2_error: tuple
    g2_ratio: tuple          # |G - G2| / |w|^(1/3)
    g1_ratio: tuple          # |G - G1| / |G1|
    g2_exponent: float       # log-log slope of |G - G2| against |w|
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "w": list(self.w),
            "G": list(self.G),
            "g2_error": list(self.g2_error),
            "g2_ratio": list(self.g2_ratio),
            "g1_ratio": list(self.g1_ratio),
            "g2_exponent": self.g2_exponent,
        }


def check_puiseux(ws) -> PuiseuxReport:
    """Compare the tracked branch with both small-w expansions on (-0.1, 0)."""
    w = np.asarray(list(ws), dtype=float)
    if w.size == 0 or np.any(w >= 0) or np.any(w <= -0.1):
        raise ValueError("points must lie in (-0.1, 0)")
    G = stieltjes_G(w.astype(complex)).real
    e2 = np.abs(G - g2_expansion(w).real)
    g1 = g1_expansion(w).real
    r2 = e2 / np.abs(w) ** (1 / 3)
    r1 = np.abs(G - g1) / np.abs(g1)
    if w.size >= 2:
        slope = float(np.polyfit(np.log(np.abs(w)), np.log(np.maximum(e2, 1e-300)), 1)[0])
    else:
        slope = float("nan")
    return PuiseuxReport(tuple(map(float, w)), tuple(map(float, G)), tuple(map(float, e2)),
                         tuple(map(float, r2)), tuple(map(float, r1)), slope)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def write_csv(samples: DensitySamples, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("t,density\n")
        for t, r in zip(samples.t, samples.rho):
            fh.write(f"{t:.12g},{r:.12g}\n")


def write_svg(samples: DensitySamples, path, *, abs_version: bool = False,
              overlay: bool = False, width: int = 640, height: int = 400) -> None:
    """One polyline with axes.  ``abs_version`` plots the density of |a|,
    2s rho(s^2); ``overlay`` adds the quarter-circular curve sqrt(4 - s^2)/pi."""
    if abs_version:
        x = np.sqrt(samples.t)
        y = 2 * x * samples.rho
    else:
        x, y = samples.t, samples.rho
    curves = [(x, y, "#1f4e9c")]
    if overlay:
        s = np.linspace(0, 2, 400)
        curves.append((s, np.sqrt(np.maximum(4 - s * s, 0)) / math.pi, "#c0392b"))
    xmax = max(float(c[0].max()) for c in curves)
    ymax = 1.1 * max(float(np.quantile(y, 0.9)), max(float(c[1].max()) for c in curves[1:]) if overlay else 0)
    ymax = ymax or 1.0
    m = 40
    sx = lambda v: m + (width - 2 * m) * v / xmax
    sy = lambda v: height - m - (height - 2 * m) * min(v, ymax) / ymax
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
             f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
             f'<text x="{width - m}" y="{height - m + 16}" font-size="11" text-anchor="end">'
             f'{"s" if abs_version else "t"} (0 to {xmax:.3g})</text>',
             f'<text x="{m - 4}" y="{m - 6}" font-size="11">density (max shown {ymax:.3g}, '
             f'eps={samples.eps:g})</text>']
    for cx, cy, colour in curves:
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(cx, cy))
        parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1" points="{pts}"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(parts) + "\n")
