"""Pin BLAS threading before numpy loads anywhere in the test run.

Reproducible (bit-identical) eigensolver output requires a fixed BLAS
thread count; worker-pool parallelism in the experiments is unaffected.
"""

import os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")
