"""Numerical tolerances shared by every analysis."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used to turn floating-point spectra into verdicts.

    Attributes
    ----------
    rank_tol
        Singular values at or below ``rank_tol`` times the reference scale
        count as zero when computing ranks and dimension functions.
    spec_tol
        Eigenvalues at or below ``spec_tol`` times the largest eigenvalue
        (over the whole grid) count as zero when extracting frame bounds.
    conv_eps
        Frobenius-norm change below which the alternating-projection
        iteration is considered converged.
    max_iter
        Maximum number of squaring steps of the alternating-projection
        iteration; step ``t`` holds the ``2**t``-th power of the symmetrized
        product, so the default of 22 stands for about 4.2 million sweeps.
    close_eps
        A Friedrichs cosine at or above ``1 - close_eps`` is reported as
        "sum not closed".
    """

    rank_tol: float = 1e-10
    spec_tol: float = 1e-10
    conv_eps: float = 1e-10
    max_iter: int = 22
    close_eps: float = 1e-4

    def __post_init__(self):
        for name in ("rank_tol", "spec_tol", "conv_eps", "close_eps"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")

    def updated(self, **overrides) -> "Tolerances":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()

DEFAULT_GRID = {1: 512, 2: 64}


def sweep_threads() -> int:
    """Worker count for grid sweeps, from ``FSIS_THREADS`` (0 or unset = auto)."""
    raw = os.environ.get("FSIS_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"FSIS_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("FSIS_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def parallel_map(fn, items, min_chunk: int = 64) -> list:
    """``[fn(x) for x in items]`` spread over threads; order is preserved."""
    items = list(items)
    workers = min(sweep_threads(), max(1, len(items) // min_chunk))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
