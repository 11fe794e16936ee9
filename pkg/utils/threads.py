import os

_BLAS_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "VECLIB_MAXIMUM_THREADS", "NUMEXPR_NUM_THREADS")


def pin_blas_threads(count: int = 1) -> None:
    """Cap BLAS thread pools. Only effective before numpy is first imported."""
    for var in _BLAS_VARS:
        os.environ.setdefault(var, str(count))
