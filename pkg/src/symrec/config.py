"""Global numerical tolerances and the dense-dimension cap."""

from __future__ import annotations

import os

# Hermiticity / unitarity / PSD checks, operator norm.
HERM_TOL = 1e-10
# Trace preservation and normalization checks.
TRACE_TOL = 1e-10
# Pure-state norm check.
NORM_TOL = 1e-12
# Eigenvalues below this count as zero rank (QFI pair skipping, purification).
RANK_CUTOFF = 1e-12
# PSD inputs: eigenvalues in [-PSD_CLAMP_TOL, 0) are clamped to 0; anything
# below PSD_ERROR_TOL is a hard error.
PSD_CLAMP_TOL = 1e-10
PSD_ERROR_TOL = -1e-8
# Eigenvalue clustering gap for charge-sector identification.
SECTOR_GAP_TOL = 1e-8

DEFAULT_DIM_CAP = 4096


def dim_cap() -> int:
    """Dense-operator dimension cap. Override with the SYMREC_DIM_CAP env var."""
    return int(os.environ.get("SYMREC_DIM_CAP", DEFAULT_DIM_CAP))


def check_dim_cap(total_dim: int) -> None:
    cap = dim_cap()
    if total_dim > cap:
        raise ValueError(
            f"total dimension {total_dim} exceeds the dense cap {cap} "
            "(set SYMREC_DIM_CAP to override)"
        )
