"""Central finite-difference verification of tape gradients.

The numeric side only ever calls the forward closure, so it is independent
of the backward implementation it is checking. Run models in float64 here;
32-bit finite differences are too noisy for tight thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .module import Parameter

# |analytic - numeric| below this is indistinguishable from fp noise at h=1e-3
ABS_FLOOR = 1e-10


@dataclass
class GradCheckReport:
    tolerance: float
    h: float
    n_coordinates: int
    max_rel_error: float
    per_param: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"grad_check[{status}] max_rel={self.max_rel_error:.3e} "
                f"tol={self.tolerance:.1e} coords={self.n_coordinates}")


def _rel_error(analytic: float, numeric: float) -> float:
    diff = abs(analytic - numeric)
    if diff <= ABS_FLOOR:
        return 0.0
    return diff / max(abs(analytic), abs(numeric), ABS_FLOOR)


def grad_check(f, params: list[Parameter], h: float = 1e-3, tolerance: float = 1e-5,
               n_samples: int = 100, rng: np.random.Generator | None = None) -> GradCheckReport:
    """Compare tape gradients of scalar ``f()`` against central differences.

    ``f`` must be deterministic given the parameter values (freeze any RNG
    inputs outside). Samples at least ``n_samples`` coordinates across all
    parameters, or every coordinate if there are fewer.
    """
    if rng is None:
        rng = np.random.default_rng(0)

    for p in params:
        p.grad = None
    loss = f()
    T.backward(loss)
    analytic = [np.zeros_like(p.data) if p.grad is None else np.array(p.grad, dtype=np.float64)
                for p in params]

    sizes = np.array([p.data.size for p in params])
    total = int(sizes.sum())
    n = min(n_samples, total) if total > n_samples else total
    flat_idx = rng.choice(total, size=n, replace=False) if n < total else np.arange(total)
    bounds = np.cumsum(sizes)

    report = GradCheckReport(tolerance=tolerance, h=h, n_coordinates=len(flat_idx), max_rel_error=0.0)
    with T.no_grad():
        for fi in flat_idx:
            pi = int(np.searchsorted(bounds, fi, side="right"))
            local = int(fi - (bounds[pi - 1] if pi > 0 else 0))
            p = params[pi]
            flat = p.data.reshape(-1)
            orig = flat[local]
            flat[local] = orig + h
            f_plus = float(f().data)
            flat[local] = orig - h
            f_minus = float(f().data)
            flat[local] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            a = float(analytic[pi].reshape(-1)[local])
            err = _rel_error(a, numeric)
            name = p.name or f"param{pi}"
            report.per_param[name] = max(report.per_param.get(name, 0.0), err)
            report.max_rel_error = max(report.max_rel_error, err)
    return report
