"""Discretization of J(w) dw and the star-to-chain coefficient map.

The continuum environment is first replaced by a quadrature measure (the
star picture: one oscillator per node, coupled directly to the system).
Tridiagonalizing that measure with the Lanczos procedure yields the
nearest-neighbor chain: site frequencies are the diagonal recurrence
coefficients, hoppings the off-diagonal ones, and the system couples only
to the first site with strength kappa0 = sqrt(total measure mass).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import NumericalError, ParameterError
from .spectral import SpectralDensity

__all__ = [
    "DiscretizedMeasure",
    "ChainCoefficients",
    "discretize",
    "recurrence_coefficients",
    "asymptotic_limits",
    "lightcone_length",
    "default_node_count",
]


@dataclass
class DiscretizedMeasure:
    """Quadrature nodes and weights approximating J(w) dw.

    ``weights[k]`` is the full measure mass carried by ``nodes[k]``; the sum
    of the weights therefore converges to the integral of J over the
    support as the node count grows.
    """

    nodes: np.ndarray
    weights: np.ndarray
    support: tuple[float, float] | None = None
    temperature_K: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.shape != self.weights.shape:
            raise ParameterError("nodes and weights must be matching 1-d arrays")
        if self.nodes.size == 0:
            raise ParameterError("measure needs at least one node")
        if np.any(np.diff(self.nodes) <= 0):
            raise ParameterError("nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ParameterError("weights must be positive")
        if self.support is None:
            self.support = (float(self.nodes[0]), float(self.nodes[-1]))

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return self.nodes.size


@dataclass
class ChainCoefficients:
    """Tridiagonal chain data: kappa0, site frequencies, hoppings.

    ``omegas`` has one entry per chain site; ``kappas`` one per bond, so
    ``len(kappas) == len(omegas) - 1``.
    """

    kappa0: float
    omegas: np.ndarray
    kappas: np.ndarray
    support: tuple[float, float]
    temperature_K: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=float)
        self.kappas = np.asarray(self.kappas, dtype=float)
        if self.kappas.size != max(self.omegas.size - 1, 0):
            raise ParameterError("need exactly one hopping per bond")

    def __len__(self) -> int:
        return self.omegas.size

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "support": [self.support[0], self.support[1]],
            "temperature_K": self.temperature_K,
            "kappa0": self.kappa0,
            "omegas": self.omegas.tolist(),
            "kappas": self.kappas.tolist(),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChainCoefficients":
        if data.get("version") != 1:
            raise ParameterError(f"unsupported version {data.get('version')!r}")
        return cls(
            kappa0=float(data["kappa0"]),
            omegas=np.asarray(data["omegas"], dtype=float),
            kappas=np.asarray(data["kappas"], dtype=float),
            support=(float(data["support"][0]), float(data["support"][1])),
            temperature_K=float(data["temperature_K"]),
            metadata=dict(data.get("metadata", {})),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ChainCoefficients":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# -- measure discretization ----------------------------------------------------


def _panel_edges(sd: SpectralDensity, M: int):
    """Panel boundaries: equal-width background plus feature refinement.

    Sharp peaks get geometric edge ladders center +- width*4^j so that each
    refined panel sees the peak on its own scale; supports crossing zero are
    always split there (thermal densities may kink at 0); tabulated grids
    contribute their breakpoints.
    """
    lo, hi = sd.support
    span = hi - lo
    n_bg = min(8, max(1, M // 4))
    edges = set(np.linspace(lo, hi, n_bg + 1).tolist())
    if lo < 0.0 < hi:
        edges.add(0.0)
    seg = sd.segment_points()
    if seg:
        stride = max(1, math.ceil(len(seg) / 200))
        edges.update(seg[::stride])
    bg_width = span / n_bg
    for center, width in sd.peaks():
        if width >= bg_width / 4:
            continue
        j = 0
        while width * 4**j < bg_width and j < 40:
            for e in (center - width * 4**j, center + width * 4**j):
                if lo < e < hi:
                    edges.add(e)
            j += 1
    out = sorted(edges)
    kept = [out[0]]
    for e in out[1:]:
        if e - kept[-1] > 1e-12 * span:
            kept.append(e)
    kept[-1] = hi
    return np.asarray(kept)


def discretize(sd: SpectralDensity, M: int) -> DiscretizedMeasure:
    """Build an M-node (or slightly larger) quadrature measure for J(w) dw.

    Composite Gauss-Legendre panels carry the smooth parts; when the density
    has a fractional power law at w = 0 the panels touching zero switch to
    Gauss-Jacobi rules that absorb |w|^p into the quadrature weight.

    Every panel gets ceil(M / background panel count) points: the moment
    integrals behind a length-N chain involve polynomials of degree ~2N,
    and each panel must hold enough points for the degree such a polynomial
    reaches across one background width.  Node count is therefore exactly M
    for smooth densities and above M when feature refinement adds panels.
    """
    if M < 2:
        raise ParameterError(f"need at least 2 nodes, got {M}")
    edges = _panel_edges(sd, M)
    n_panels = len(edges) - 1
    n_bg = min(8, max(1, M // 4))
    pts = max(2, math.ceil(M / n_bg))
    xg, vg = roots_legendre(pts)
    p = sd.origin_exponent()
    nodes = []
    weights = []
    for a, b in zip(edges[:-1], edges[1:]):
        h = b - a
        if p is not None and a == 0.0:
            xj, vj = roots_jacobi(pts, 0.0, p)
            w = (xj + 1.0) * (h / 2.0)
            vals = (h / 2.0) ** (p + 1.0) * vj * (sd.evaluate(w) / w**p)
        elif p is not None and b == 0.0:
            xj, vj = roots_jacobi(pts, p, 0.0)
            w = (xj - 1.0) * (h / 2.0)
            vals = (h / 2.0) ** (p + 1.0) * vj * (sd.evaluate(w) / np.abs(w) ** p)
        else:
            w = 0.5 * (a + b) + 0.5 * h * xg
            vals = 0.5 * h * vg * sd.evaluate(w)
        nodes.append(w)
        weights.append(vals)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    keep = weights > 0  # exact zeros of J carry no measure
    nodes, weights = nodes[keep], weights[keep]
    if nodes.size < 1:
        raise NumericalError("density vanishes on the whole support")
    return DiscretizedMeasure(
        nodes, weights,
        support=sd.support,
        temperature_K=sd.temperature_K,
        metadata={
            "requested_nodes": M,
            "panel_count": n_panels,
            "points_per_panel": pts,
            "density": sd.describe(),
        },
    )


# -- recurrence coefficients ---------------------------------------------------


def recurrence_coefficients(m: DiscretizedMeasure, N: int, *,
                            headroom: float = 4.0) -> ChainCoefficients:
    """Chain coefficients from the measure via Lanczos tridiagonalization.

    Runs the Lanczos iteration on diag(nodes) starting from
    sqrt(weights / mass), with full reorthogonalization (two projection
    passes per step) so the three-term coefficients stay accurate far
    beyond where the plain recurrence loses orthogonality.

    ``headroom`` is the required node-count multiple: N * headroom <= node
    count.  The default 4 keeps a comfortable quadrature margin; 1 admits
    N equal to the node count, where the chain is an exact unitary image
    of the star measure.
    """
    M = len(m)
    if N < 1:
        raise ParameterError(f"chain length must be >= 1, got {N}")
    if headroom < 1:
        raise ParameterError(f"headroom must be >= 1, got {headroom}")
    if N * headroom > M:
        raise ParameterError(
            f"chain length {N} needs at least {math.ceil(N * headroom)} nodes "
            f"(have {M}); increase the node count or lower headroom")
    mass = m.mass
    nodes = m.nodes
    scale = max(np.abs(nodes).max(), 1e-300)
    V = np.empty((M, N))
    alphas = np.empty(N)
    betas = np.empty(max(N - 1, 0))
    v = np.sqrt(m.weights / mass)
    for j in range(N):
        V[:, j] = v
        u = nodes * v
        alphas[j] = v @ u
        u -= alphas[j] * v
        if j > 0:
            u -= betas[j - 1] * V[:, j - 1]
        for _ in range(2):
            u -= V[:, : j + 1] @ (V[:, : j + 1].T @ u)
        if j == N - 1:
            break
        b = float(np.linalg.norm(u))
        if b <= 1e-14 * M * scale:
            raise NumericalError(
                f"measure exhausted after {j + 1} chain modes; "
                "reduce the chain length or refine the discretization")
        betas[j] = b
        v = u / b
    gram = V.T @ V
    err = float(np.abs(gram - np.eye(N)).max())
    if err > 1e-10:
        raise NumericalError(
            f"orthogonality loss {err:.2e} exceeds 1e-10; increase the node "
            "count M")
    meta = dict(m.metadata)
    meta.update(node_count=M, orthogonality_error=err)
    return ChainCoefficients(
        kappa0=math.sqrt(mass),
        omegas=alphas,
        kappas=betas,
        support=m.support,
        temperature_K=m.temperature_K,
        metadata=meta,
    )


# -- asymptotics and sizing ------------------------------------------------


def asymptotic_limits(support: tuple[float, float]) -> tuple[float, float]:
    """Limits (w_inf, k_inf) of the chain coefficients for a measure on
    [w_min, w_max]: the interval midpoint and a quarter of its width."""
    lo, hi = float(support[0]), float(support[1])
    if not lo < hi:
        raise ParameterError(f"degenerate support [{lo}, {hi}]")
    return (0.5 * (hi + lo), 0.25 * (hi - lo))


def lightcone_length(support: tuple[float, float], t_max: float) -> int:
    """Chain sites needed so the propagation front stays inside by t_max.

    The front moves at most 2*k_inf sites per unit time; a 20% margin and a
    5-site buffer absorb the spread of the front itself.
    """
    if t_max < 0:
        raise ParameterError(f"t_max must be >= 0, got {t_max}")
    _, k_inf = asymptotic_limits(support)
    base = 2.0 * k_inf * t_max * 1.2
    # round before ceil so 1-ulp float excess cannot add a full site
    return int(math.ceil(round(base, 9))) + 5


def default_node_count(N: int, headroom: float = 4.0) -> int:
    """Node count giving the requested chain length its stability margin."""
    return max(math.ceil(N * headroom), 400)
