"""Deterministic partition of a window into roughly equal patches.

The same divider serves three places: splitting past observations, splitting
the time-varying-known token sequence, and sizing the forecast patches the
output head emits. For a window of length ``h`` split into ``k`` parts the
base length is ``b = floor(h/k)``; the first ``h - b*k`` patches are one step
longer, so lengths never differ by more than one and always sum to ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import ConfigError, ResolutionTooDenseError


@dataclass(frozen=True)
class ResolutionSet:
    """Ordered distinct part counts; one token per part per resolution."""

    ks: tuple[int, ...]

    def __post_init__(self):
        ks = tuple(int(k) for k in self.ks)
        if not ks:
            raise ConfigError("resolution set must be nonempty")
        if any(k < 1 for k in ks):
            raise ConfigError(f"resolutions must be >= 1, got {ks}")
        if sorted(set(ks)) != list(ks):
            raise ConfigError(f"resolutions must be sorted and distinct, got {ks}")
        object.__setattr__(self, "ks", ks)

    def __iter__(self):
        return iter(self.ks)

    def __len__(self):
        return len(self.ks)

    @property
    def total_tokens(self) -> int:
        return sum(self.ks)

    @classmethod
    def of(cls, *ks) -> "ResolutionSet":
        return cls(tuple(sorted(set(int(k) for k in ks))))


@dataclass(frozen=True)
class PatchPlan:
    """Lengths and offsets of the parts a length-``h`` window splits into."""

    h: int
    k: int
    lengths: tuple[int, ...]
    offsets: tuple[int, ...]

    @property
    def base(self) -> int:
        return self.h // self.k

    @property
    def n_long(self) -> int:
        return self.h - self.base * self.k

    def slices(self):
        return [slice(o, o + n) for o, n in zip(self.offsets, self.lengths)]


def make_patch_plan(h: int, k: int) -> PatchPlan:
    """Split ``h`` steps into ``k`` parts, longer parts first.

    Raises :class:`ResolutionTooDenseError` when ``k > h``: a zero-length
    patch has no projection domain, so dense resolutions are rejected rather
    than padded into existence.
    """
    if k < 1:
        raise ConfigError(f"part count must be >= 1, got {k}")
    if h < 1:
        raise ConfigError(f"window length must be >= 1, got {h}")
    if k > h:
        raise ResolutionTooDenseError(f"cannot split {h} steps into {k} parts")
    b = h // k
    n_long = h - b * k
    lengths = (b + 1,) * n_long + (b,) * (k - n_long)
    offsets = []
    pos = 0
    for n in lengths:
        offsets.append(pos)
        pos += n
    return PatchPlan(h=h, k=k, lengths=lengths, offsets=tuple(offsets))
