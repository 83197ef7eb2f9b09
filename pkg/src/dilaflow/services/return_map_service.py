import logging
from collections.abc import Callable, Hashable

from .. import config
from ..models.flow import Branch, Gap, PiecewiseAffineMap, TraceConfig
from ..models.geometry import DirectionAngle, EdgeRef, cross
from ..models.surface import Surface
from ..utils.custom_exceptions import (
    MalformedSurfaceException,
    SectionParallelToDirectionException,
)
from .tracer_service import first_return

logger = logging.getLogger(__name__)

_Sample = tuple[Hashable, float, float]


class _Sampler:
    """Memoised first-return evaluation keyed by edge coordinate."""

    def __init__(self, s: Surface, section: EdgeRef, d: DirectionAngle, cfg: TraceConfig):
        self._s = s
        self._section = section
        self._d = d
        self._cfg = cfg
        self._cache: dict[float, _Sample] = {}

    def __call__(self, x: float) -> _Sample:
        hit = self._cache.get(x)
        if hit is None:
            result = first_return(self._s, self._section, x, self._d, self._cfg)
            if isinstance(result, str):
                hit = (("gap", result), float("nan"), float("nan"))
            else:
                signature, y, ratio = result
                hit = (signature, y, ratio)
            self._cache[x] = hit
        return hit

    @property
    def evaluations(self) -> int:
        return len(self._cache)


def _transitions(
    evaluate: Callable[[float], _Sample],
    lo: float,
    lo_key: Hashable,
    hi: float,
    hi_key: Hashable,
    depth: int = 0,
) -> list[tuple[float, Hashable]]:
    # (breakpoint, key of the piece to its right) between two differing samples
    if hi - lo <= config.SPLIT_TOLERANCE or depth > 96:
        return [(0.5 * (lo + hi), hi_key)]
    mid = 0.5 * (lo + hi)
    key = evaluate(mid)[0]
    if key == lo_key:
        return _transitions(evaluate, mid, lo_key, hi, hi_key, depth + 1)
    if key == hi_key:
        return _transitions(evaluate, lo, lo_key, mid, key, depth + 1)
    return _transitions(evaluate, lo, lo_key, mid, key, depth + 1) + _transitions(
        evaluate, mid, key, hi, hi_key, depth + 1
    )


def return_map_on_edge(
    s: Surface,
    section: EdgeRef,
    d: DirectionAngle,
    cfg: TraceConfig | None = None,
) -> PiecewiseAffineMap:
    """
    Computes the first-return map of the flow in direction ``d`` on an edge.

    The edge coordinate interval (0, 1) is sampled, cut where the crossing
    signature changes (breakpoints bisected to ``SPLIT_TOLERANCE``) and every
    piece with a common signature becomes an affine branch. Pieces whose
    trajectories hit a singularity, leave through the boundary or run out of
    return budget are listed as gaps.

    Args:
        s: surface
        section: edge used as cross-section
        d: flow direction, not parallel to the section
        cfg: tracer budgets; ``return_samples`` and ``max_return_crossings`` apply

    Returns:
        PiecewiseAffineMap: branches sorted by domain
    """
    cfg = cfg or TraceConfig()
    if not s.has_edge(section):
        raise MalformedSurfaceException(detail=f"Unknown edge {tuple(section)}")
    poly = s.polygon(section.polygon)
    w = poly.edge_vector(section.edge_index)
    if abs(cross(w, d.unit)) <= s.eps_geo * abs(w):
        raise SectionParallelToDirectionException(tuple(section))

    evaluate = _Sampler(s, section, d, cfg)
    n = cfg.return_samples
    xs = [(k + 0.5) / n for k in range(n)]
    keys = [evaluate(x)[0] for x in xs]

    # Each piece: [start, end, key, representative sample]
    pieces: list[list] = [[0.0, None, keys[0], xs[0]]]
    for k in range(1, n):
        if keys[k] == keys[k - 1]:
            continue
        for point, key in _transitions(evaluate, xs[k - 1], keys[k - 1], xs[k], keys[k]):
            pieces[-1][1] = point
            pieces.append([point, None, key, None])
        pieces[-1][3] = xs[k]
    pieces[-1][1] = 1.0

    branches: list[Branch] = []
    gaps: list[Gap] = []
    for start, end, key, probe in pieces:
        if probe is None:
            probe = 0.5 * (start + end)
        if isinstance(key, tuple) and key and key[0] == "gap":
            gaps.append(Gap(domain=(start, end), reason=key[1]))
            continue
        _, y, ratio = evaluate(probe)
        branches.append(
            Branch(domain=(start, end), slope=ratio, offset=y - ratio * probe, signature=key)
        )

    logger.debug(
        "Return map computed",
        extra={
            "section": tuple(section),
            "branches": len(branches),
            "gaps": len(gaps),
            "evaluations": evaluate.evaluations,
        },
    )
    return PiecewiseAffineMap(
        section=section, direction=d, branches=tuple(branches), gaps=tuple(gaps)
    )
