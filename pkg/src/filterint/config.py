"""Engine-wide configuration knobs.

All values here are deliberate desk-scale schedules; anything that a proof
leaves as "small enough" or "large enough" is pinned to a concrete number so
runs are reproducible.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class EngineConfig:
    # Laurent inversion keeps exponents below valuation(1/a) + truncation_order.
    truncation_order: int = 16
    # Hard cap on the prefix length searched by the sequence-filter oracle.
    jessen_cap: int = 24
    # Reference tail for sequence-filter witnesses: alternating 0101... = 1/3.
    # Geometric filter caps.
    max_ambient_dim: int = 3
    max_fragments: int = 16
    # Quadrature refinement stops with an error beyond this many cells.
    quadrature_cell_cap: int = 1 << 18
    # Per-witness point budget for the geometric oracle.
    geometry_point_cap: int = 1_500_000
    # Growth factor between dimension stages; the proof's 1/eps dwarfing
    # ratio, capped so desk-scale witnesses stay enumerable.
    geometry_dwarf: int = 16
    # Curved-fragment outputs are rounded to this dyadic precision.
    surface_bits: int = 40
    # Sampler granularity: positions are drawn as k / 2**sampler_bits.
    sampler_bits: int = 48
    # Refuse to enumerate snapshots larger than this.
    enumeration_cap: int = 2_000_000
    # Padding cap for size-padded witnesses (2**k points).
    pad_bits_cap: int = 17


_config = EngineConfig()


def get_config() -> EngineConfig:
    return _config


def set_truncation(order: int) -> None:
    if order < 1:
        raise ValueError("truncation order must be >= 1")
    global _config
    _config = replace(_config, truncation_order=order)


def configure(**kwargs) -> EngineConfig:
    global _config
    _config = replace(_config, **kwargs)
    return _config


@contextmanager
def temporary(**kwargs):
    """Run a block under modified configuration, then restore."""
    global _config
    saved = _config
    _config = replace(_config, **kwargs)
    try:
        yield _config
    finally:
        _config = saved
