"""Subnormality margins and empirical sup growth of random phase sums.

A real random variable xi is subnormal when E e^(lambda xi) <= e^(lambda^2/2)
for every real lambda; symmetric +-1 variables are the canonical example
and the standard Gaussian is the equality case.  For independent
subnormal weights the sup over degree-d phase polynomials of the
unnormalized sum |sum xi_n e(P(n))| grows like sqrt(N log N) almost
surely, so on a log-log plot the empirical sup should run with slope
just above 1/2 and stay below a fixed multiple of sqrt(N log N).

``lsk_empirical_sup`` reuses the oscillation module's grid + refine
kernel on identical grids (times N), which keeps the two modules'
estimates consistent to the bit and makes the cross-module oracle a
strict identity check.  The absolute constant in the growth law is not
pinned down; tests use the documented headroom factor 5.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .oscillation import grid_sup_average, refine_local
from .sequences import ComplexSequence, rademacher_sequence, uniform_unit_sequence

RADEMACHER = "rademacher"
SCALED_RADEMACHER = "scaled-rademacher"
STANDARD_GAUSSIAN = "standard-gaussian"

_KINDS = (RADEMACHER, SCALED_RADEMACHER, STANDARD_GAUSSIAN)

#: Empirical headroom multiple of sqrt(N log N); policy, not theory.
GROWTH_HEADROOM = 5.0


@dataclass(frozen=True)
class Distribution:
    """Distribution tag with closed-form moment generating function."""

    kind: str
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind: unsupported distribution {self.kind!r}")

    def log_mgf(self, lam: np.ndarray) -> np.ndarray:
        """log E e^(lambda xi), vectorized over lambda."""
        lam = np.asarray(lam, dtype=np.float64)
        if self.kind == STANDARD_GAUSSIAN:
            return lam * lam / 2.0
        c = self.scale if self.kind == SCALED_RADEMACHER else 1.0
        # log cosh(c lam), overflow-safe.
        z = c * lam
        return np.logaddexp(z, -z) - np.log(2.0)


@dataclass(frozen=True)
class RandomSequenceSpec:
    """Sampling request: distribution, seed, length.

    Scaled +-c weights are admitted only for |c| <= 1, the subnormal
    range; the margin computation itself accepts any scale.
    """

    distribution: Distribution
    seed: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("length: must be >= 1")
        if (
            self.distribution.kind == SCALED_RADEMACHER
            and abs(self.distribution.scale) > 1.0
        ):
            raise ValueError(
                "distribution: scaled-rademacher requires |scale| <= 1"
            )


def sample(spec: RandomSequenceSpec) -> ComplexSequence:
    """Deterministic realization of the spec (counter-based per entry)."""
    kind = spec.distribution.kind
    if kind == RADEMACHER:
        return rademacher_sequence(spec.seed, spec.length)
    if kind == SCALED_RADEMACHER:
        base = rademacher_sequence(spec.seed, spec.length)
        values = base.values.astype(np.float64) * spec.distribution.scale
        return ComplexSequence(
            values,
            f"scaled-rademacher(c={spec.distribution.scale}, seed={spec.seed}, n={spec.length})",
        )
    uniforms = uniform_unit_sequence(spec.seed, spec.length)
    return ComplexSequence(
        ndtri(uniforms),
        f"standard-gaussian(seed={spec.seed}, n={spec.length})",
    )


def subnormality_margin(distribution: Distribution, lambda_grid) -> list[tuple[float, float]]:
    """margin(lambda) = lambda^2/2 - log E e^(lambda xi) on the grid.

    Nonnegative margins on the grid certify subnormality there; the
    Gaussian sits at margin identically zero.
    """
    lams = np.asarray(list(lambda_grid), dtype=np.float64)
    margins = lams * lams / 2.0 - distribution.log_mgf(lams)
    if distribution.kind == STANDARD_GAUSSIAN:
        margins = np.zeros_like(margins)
    return [(float(l), float(m)) for l, m in zip(lams, margins)]


def lsk_empirical_sup(
    spec,
    degree: int,
    n_list,
    grid_per_dim: int,
) -> list[tuple[int, float]]:
    """Grid + refined max of |sum_{n<N} xi_n e(P(n))| for each N.

    Note the quantity is the unnormalized sum: it is N times the
    oscillation module's sup estimate on the same grid and weights.
    ``spec`` may be a RandomSequenceSpec or any sequence-like object.
    """
    ns = sorted(int(n) for n in n_list)
    if not ns or ns[0] < 1:
        raise ValueError("n_list: nonempty, entries >= 1")
    if isinstance(spec, RandomSequenceSpec):
        if spec.length < ns[-1]:
            raise ValueError("n_list: exceeds spec.length")
        seq = sample(spec)
    else:
        seq = spec
    out = []
    for n in ns:
        grid_value, grid_coeffs = grid_sup_average(seq, degree, grid_per_dim, n)
        refined, _ = refine_local(
            seq, degree, grid_coeffs, n, initial_step=1.0 / grid_per_dim
        )
        out.append((n, refined * n))
    return out


def growth_exponent(series) -> float:
    """Least-squares slope of log value against log N.

    Needs at least three points with positive values.
    """
    points = [(int(n), float(v)) for n, v in series]
    if len(points) < 3:
        raise ValueError("series: at least 3 points required")
    if any(v <= 0 for _, v in points):
        raise ValueError("series: values must be positive")
    xs = np.log([n for n, _ in points])
    ys = np.log([v for _, v in points])
    xs = xs - xs.mean()
    return float((xs * (ys - ys.mean())).sum() / (xs * xs).sum())
