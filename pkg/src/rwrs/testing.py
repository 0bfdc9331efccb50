"""Degenerate laws for sanity checks; never exposed by the CLI."""
from __future__ import annotations

from .stable_laws import JumpLaw


def unit_drift_jump() -> JumpLaw:
    """The deterministic +1 jump.

    The walk is then ``S_j = j`` and the skew product reduces to a direct
    product of a trivial base with the scenery shift. It carries no
    aperiodicity certificate and its normalizer is ballistic, ``a(n) = n``.
    """
    return JumpLaw("unit_drift", 1.0, 0.0, 0.0, None, False)
