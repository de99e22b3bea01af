"""Thread-count capping, applied before numpy loads its BLAS.

HELIOS_THREADS caps internal parallelism for the whole process. The cap
is best-effort: BLAS libraries read their environment when they load,
so it only takes effect if this module runs before numpy is imported
(guaranteed when the package is the first importer of numpy in the
process, as in the CLI).
"""

import os

_BLAS_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def apply_cap() -> None:
    cap = os.environ.get("HELIOS_THREADS")
    if not cap:
        return
    try:
        n = int(cap)
    except ValueError:
        return
    if n < 1:
        return
    for var in _BLAS_VARS:
        os.environ.setdefault(var, str(n))


apply_cap()
