"""Counting kernels over index tables.

Two interchangeable backends: a Cython extension (``_fastkern``) and a
numpy reference implementation (``_purekern``).  The compiled backend is
selected at import when available; set ``ACTCOMB_PURE=1`` to force the
pure one.  Both produce identical results.
"""

import os

if os.environ.get("ACTCOMB_PURE"):
    from . import _purekern as impl

    BACKEND = "pure"
else:
    try:
        from . import _fastkern as impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _purekern as impl

        BACKEND = "pure"

product_indices = impl.product_indices
closure_indices = impl.closure_indices
overlap_counts = impl.overlap_counts
act_histogram = impl.act_histogram
pair_histogram = impl.pair_histogram
