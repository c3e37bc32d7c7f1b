"""Derivative-free maximisation over integer positions."""

from __future__ import annotations

from typing import Callable

from . import _engine


def quadratic_boundary_search(objective: Callable[[int], float], lo: int,
                              hi: int, max_iters: int = 20, tol: float = 1e-9,
                              start: int | None = None) -> tuple[int, float]:
    """Maximise ``objective`` over the integers in ``[lo, hi]``.

    Successive parabolic interpolation: a quadratic is fitted through the
    bracket ends and the incumbent, its vertex (rounded to the nearest
    integer) is probed and the bracket shrinks around the better point.  When
    the fit is not concave the larger half of the bracket is bisected; when
    the vertex lands on the incumbent its two neighbours are checked.  The
    search stops after ``max_iters`` probes or once the incumbent is a
    discrete local maximum.

    ``start`` defaults to the bracket midpoint.  The returned position never
    scores below ``start``: a probe replaces the incumbent only if it gains
    more than ``tol``.  Brackets narrower than two steps are scanned directly.
    """
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise ValueError(f"empty bracket [{lo}, {hi}]")
    if start is None:
        start = (lo + hi) // 2
    if not lo <= start <= hi:
        raise ValueError(f"start {start} outside [{lo}, {hi}]")
    state = _engine.search_init(lo, hi, int(start), int(max_iters), float(tol))
    while True:
        pos, done = _engine.search_ask(state)
        if done:
            break
        _engine.search_tell(state, float(objective(int(pos))))
    return int(state[_engine._BEST_POS]), float(state[_engine._BEST])
