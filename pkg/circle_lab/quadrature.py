"""
Composite Gauss-Legendre quadrature on fixed breakpoints with panel doubling.

Integrands are vectorized: ``f(x)`` receives a 1-D node array and returns
values whose last axis runs over the nodes, so one call integrates a whole
family of parameters at once.
"""
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from circle_lab.errors import QuadratureFailure
from circle_lab.settings import get_settings

MAX_NODES = 2**24


@lru_cache(maxsize=16)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(
    breaks: Sequence[float], panels, nodes: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of the composite rule: each interval between consecutive
    breakpoints is cut into ``panels`` equal panels (an int or one int per interval).
    """
    n = nodes or get_settings().quadrature_nodes
    t, w = gauss_legendre(n)
    breaks = np.asarray(breaks, dtype=np.float64)
    counts = np.broadcast_to(np.asarray(panels, dtype=np.int64), (len(breaks) - 1,))
    xs, ws = [], []
    for (a, b), m in zip(zip(breaks[:-1], breaks[1:]), counts):
        if b <= a:
            continue
        edges = np.linspace(a, b, int(m) + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        xs.append((mid[:, None] + half[:, None] * t[None, :]).ravel())
        ws.append((half[:, None] * w[None, :]).ravel())
    if not xs:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(xs), np.concatenate(ws)


def integrate_panels(f: Callable, breaks: Sequence[float], panels, nodes: Optional[int] = None):
    x, w = panel_rule(breaks, panels, nodes)
    return np.asarray(f(x)) @ w


def adaptive_panels(
    f: Callable,
    breaks: Sequence[float],
    panels=1,
    tol: Optional[float] = None,
    max_depth: Optional[int] = None,
    what: str = "integral",
):
    """
    Double the panel count until two successive composite rules agree within
    ``tol`` relative to max(1, |value|). Raises QuadratureFailure past max_depth.
    """
    settings = get_settings()
    tol = settings.quadrature_tol if tol is None else tol
    max_depth = settings.quadrature_max_depth if max_depth is None else max_depth
    panels = np.asarray(panels, dtype=np.int64)
    previous = integrate_panels(f, breaks, panels)
    intervals = len(breaks) - 1
    for _ in range(max_depth):
        panels = panels * 2
        total = int(np.broadcast_to(panels, (intervals,)).sum())
        if total * settings.quadrature_nodes > MAX_NODES:
            break
        current = integrate_panels(f, breaks, panels)
        scale = max(1.0, float(np.max(np.abs(current), initial=0.0)))
        if float(np.max(np.abs(current - previous), initial=0.0)) <= tol * scale:
            return current
        previous = current
    raise QuadratureFailure(
        f"{what} did not converge after {max_depth} panel doublings",
        context={"what": what, "tol": tol, "max_depth": max_depth},
    )
