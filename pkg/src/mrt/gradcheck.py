"""Finite-difference gradient oracle.

Central differences with a fixed step, evaluated per coordinate against the
analytic gradients produced by the reverse-mode engine. Large tensors are
subsampled (at most ``max_coords`` random coordinates each) to bound the
oracle's runtime. Meant to run in float64; float32 round-off drowns the
comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import RngState
from .tensor import Tensor


@dataclass
class ParamReport:
    name: str
    max_rel_err: float
    checked: int
    worst: tuple = ()  # (flat index, analytic, numeric) of the worst coordinate


@dataclass
class GradCheckReport:
    tol: float
    params: list[ParamReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.max_rel_err < self.tol for p in self.params)

    @property
    def max_rel_err(self) -> float:
        return max((p.max_rel_err for p in self.params), default=0.0)

    def failing(self) -> list[ParamReport]:
        return [p for p in self.params if p.max_rel_err >= self.tol]

    def summary(self) -> str:
        lines = []
        for p in self.params:
            status = "ok" if p.max_rel_err < self.tol else "FAIL"
            lines.append(f"{status:4s} {p.name}: max rel err {p.max_rel_err:.3e} over {p.checked} coords")
        lines.append(f"{'PASS' if self.passed else 'FAIL'}: max rel err {self.max_rel_err:.3e} (tol {self.tol:.1e})")
        return "\n".join(lines)


def _rel_err(a: float, n: float) -> float:
    return abs(a - n) / max(abs(a), abs(n), 1e-6)


def grad_check(fn, params: dict[str, Tensor], tol: float = 1e-4, step: float = 1e-5,
               max_coords: int = 200, seed: int = 0) -> GradCheckReport:
    """Compare analytic and central-difference gradients of ``fn``.

    ``fn`` takes no arguments, reads the tensors in ``params`` (and any
    other closed-over state), and returns a Tensor; its sum is the scalar
    differentiated. An empty ``params`` map yields an empty passing report.
    """
    report = GradCheckReport(tol=tol)
    if not params:
        return report

    for p in params.values():
        if p.data.dtype != np.float64:
            raise ValueError("grad_check requires float64 tensors")
        p.grad = None

    out = fn()
    out.sum().backward()
    analytic = {name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
                for name, p in params.items()}

    rng = RngState(seed)
    for name, p in params.items():
        flat = p.data.reshape(-1)
        n = flat.size
        if n > max_coords:
            coords = np.sort(rng.choice(n, shape=max_coords))
        else:
            coords = np.arange(n)
        worst = (0.0, ())
        a_flat = analytic[name].reshape(-1)
        for c in coords:
            original = flat[c]
            flat[c] = original + step
            up = float(fn().sum().data)
            flat[c] = original - step
            down = float(fn().sum().data)
            flat[c] = original
            numeric = (up - down) / (2.0 * step)
            err = _rel_err(float(a_flat[c]), numeric)
            if err > worst[0]:
                worst = (err, (int(c), float(a_flat[c]), numeric))
        report.params.append(ParamReport(name=name, max_rel_err=worst[0],
                                         checked=len(coords), worst=worst[1]))
    for name, p in params.items():
        p.grad = None
    return report
