"""Spin-resolved entropies for identical-particle pair scattering.

For indistinguishable electrons the post-scattering pair state carries,
besides *where* the pair landed, one extra bit tied to the symmetrized
spin/exchange structure.  Conventions used here:

* ``S`` on a result is the full spin-state entropy, exchange bit
  included: S = 1 + H_detection.
* ``S_modified`` strips that bit: S_modified = S - 1 is the bare
  detection entropy (which detector fired and, for antiparallel spins,
  which spin pattern it recorded).  Differences S_ap - S_par are the
  same under either convention.

Parallel spins scatter on the half shell [cutoff, pi/2] with the
antisymmetric combination |f - g|^2; antiparallel spins produce two
distinguishable branches per cell with weights |f|^2 and |g|^2; a
spin-filtered (distinguishable) pair uses |f|^2 on the full shell with
no exchange bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .amplitudes import SpinChannel
from .entropy import _stream_weight_entropy, detection_entropy_bits
from .errors import NumericalError
from .geometry import (
    AngularGrid,
    GridKind,
    range_grid_below,
    ring_grid,
    uniform_grid,
)
from .kinematics import ScatterContext


@dataclass(frozen=True)
class SpinEntropyResult:
    """Entropy of one spin channel on one grid."""

    channel: SpinChannel
    grid: AngularGrid
    S: float
    S_modified: float


def _resolve_grid(ctx: ScatterContext, channel: SpinChannel,
                  grid: AngularGrid | None, n_cells: int | None) -> AngularGrid:
    if grid is not None:
        return grid
    if n_cells is None:
        return ring_grid(ctx, channel)
    if channel is SpinChannel.DISTINGUISHABLE:
        return uniform_grid(ctx.epsilon, math.pi - ctx.epsilon, n_cells)
    return uniform_grid(ctx.epsilon, math.pi / 2.0, n_cells)


def entropy_parallel(ctx: ScatterContext, grid: AngularGrid | None = None,
                     *, n_cells: int | None = None) -> SpinEntropyResult:
    """Full spin-state entropy for parallel spins: S = 1 + H_detection.

    The normalized per-cell amplitudes c_i satisfy sum 2|c_i|^2 = 1, so
    -sum 2|c_i|^2 log2 |c_i|^2 = 1 + H(w) with w the normalized cell
    weights; the identity is used directly.
    """
    grid = _resolve_grid(ctx, SpinChannel.PARALLEL, grid, n_cells)
    h, z = _stream_weight_entropy(grid, ctx.K, SpinChannel.PARALLEL)
    if z <= 0.0:
        raise ValueError("all parallel-channel cell weights are zero")
    return SpinEntropyResult(channel=SpinChannel.PARALLEL, grid=grid,
                             S=1.0 + h, S_modified=h)


def entropy_antiparallel(ctx: ScatterContext, grid: AngularGrid | None = None,
                         *, n_cells: int | None = None) -> SpinEntropyResult:
    """Full spin-state entropy for antiparallel spins.

    Each cell contributes two outcomes (direct and exchange spin
    patterns) with weights |f|^2 and |g|^2, jointly normalized, so
    H_detection runs over 2 N weights and S = 1 + H_detection.
    """
    grid = _resolve_grid(ctx, SpinChannel.ANTIPARALLEL, grid, n_cells)
    h, z = _stream_weight_entropy(grid, ctx.K, SpinChannel.ANTIPARALLEL)
    if z <= 0.0:
        raise ValueError("all antiparallel-channel cell weights are zero")
    return SpinEntropyResult(channel=SpinChannel.ANTIPARALLEL, grid=grid,
                             S=1.0 + h, S_modified=h)


def entropy_distinguishable(ctx: ScatterContext,
                            grid: AngularGrid | None = None,
                            *, n_cells: int | None = None) -> float:
    """Detection entropy (bits) for a spin-filtered, distinguishable pair.

    The full shell [cutoff, pi - cutoff] is available, the weights are
    the direct |f|^2, and there is no exchange bit; numerically this is
    the spinless ring entropy.
    """
    grid = _resolve_grid(ctx, SpinChannel.DISTINGUISHABLE, grid, n_cells)
    h, _z = _stream_weight_entropy(grid, ctx.K, SpinChannel.DISTINGUISHABLE)
    return h


@dataclass(frozen=True)
class EquatorEntropies:
    """Closed-form entropies for N equal azimuthal cells at theta = pi/2.

    On the equator |f| = |g|, so every azimuthal cell is exactly equally
    likely and no quadrature is needed:

    * parallel:      S = 1 + log2 N,  S_modified = log2 N
    * antiparallel:  S = 2 + log2 N,  S_modified = 1 + log2 N

    hence the antiparallel-parallel gap is exactly 1 bit at any N.
    """

    n_cells: int
    S_parallel: float
    S_antiparallel: float
    S_parallel_modified: float
    S_antiparallel_modified: float

    @property
    def delta_S(self) -> float:
        return self.S_antiparallel - self.S_parallel


def equator_entropies(n_cells: int) -> EquatorEntropies:
    """Entropies of an N-cell ring of detectors on the scattering equator."""
    if n_cells < 1:
        raise ValueError(f"need at least one cell, got {n_cells}")
    log2n = math.log2(n_cells)
    return EquatorEntropies(
        n_cells=n_cells,
        S_parallel=1.0 + log2n,
        S_antiparallel=2.0 + log2n,
        S_parallel_modified=log2n,
        S_antiparallel_modified=1.0 + log2n,
    )


def postselect_entropies(ctx: ScatterContext, theta_r: float) -> dict:
    """Detection entropies when only pairs within ``theta_r`` of the
    equator are kept.

    Cells of the native width are laid down from pi/2 *downwards* so the
    acceptance band [pi/2 - theta_r, pi/2] is tiled flush against the
    equator; a trailing sliver narrower than one cell is dropped.  All
    channels are renormalized over the same retained cells.  Reported
    values are detection entropies (no exchange bit; it cancels in
    ``delta_S = S_ap - S_par`` anyway).  A channel whose total weight
    underflows to zero is reported as 0 with ``zero_weight`` set instead
    of NaN.
    """
    if not 0.0 < theta_r <= math.pi / 2.0 - ctx.epsilon:
        raise ValueError(
            f"acceptance half-angle {theta_r!r} outside (0, pi/2 - cutoff]")
    grid = range_grid_below(math.pi / 2.0, theta_r, ctx.delta_theta)
    h_sp, z_sp = _stream_weight_entropy(grid, ctx.K, SpinChannel.SPINLESS)
    h_par, z_par = _stream_weight_entropy(grid, ctx.K, SpinChannel.PARALLEL)
    h_ap, z_ap = _stream_weight_entropy(grid, ctx.K, SpinChannel.ANTIPARALLEL)
    return {
        "theta_r": float(theta_r),
        "n_cells": grid.n_cells,
        "S_spinless": h_sp,
        "S_par": h_par,
        "S_ap": h_ap,
        "delta_S": h_ap - h_par,
        "zero_weight": (z_sp <= 0.0) or (z_par <= 0.0) or (z_ap <= 0.0),
    }


def postselect_range_sweep(ctx: ScatterContext, theta_r_values) -> list[dict]:
    """Postselection sweep over acceptance half-angles; per-row failures
    are recorded in ``status`` and the sweep continues."""
    rows: list[dict] = []
    for theta_r in theta_r_values:
        try:
            row = postselect_entropies(ctx, float(theta_r))
            row["status"] = "ok"
        except (ValueError, NumericalError, FloatingPointError) as exc:
            row = {"theta_r": float(theta_r), "n_cells": 0,
                   "S_spinless": math.nan, "S_par": math.nan,
                   "S_ap": math.nan, "delta_S": math.nan,
                   "zero_weight": False, "status": f"error: {exc}"}
        rows.append(row)
    return rows
