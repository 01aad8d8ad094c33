"""Split spectroscopy for spin-1/2 chains via exact diagonalization.

Submodules are imported lazily so that entry points can pin BLAS thread
counts before numpy loads (required for byte-reproducible outputs).
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = (
    "hilbert",
    "models",
    "eigensolve",
    "splitting",
    "entanglement",
    "timedomain",
    "experiments",
    "errors",
)

_EXPORTS = {
    "ChainBasis": "hilbert",
    "XYParams": "models",
    "RandomFieldParams": "models",
    "Partition": "models",
    "PartitionedHamiltonian": "models",
    "EigenSystem": "eigensolve",
    "SplitOperatorSpec": "splitting",
    "SplitCoefficients": "splitting",
    "Spectrum": "splitting",
    "SpectralEntropyResult": "splitting",
    "EntanglementReport": "entanglement",
    "GreensSeries": "timedomain",
    "RFSimConfig": "timedomain",
    "ExperimentConfig": "experiments",
}


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    if name in _EXPORTS:
        module = importlib.import_module(f".{_EXPORTS[name]}", __name__)
        return getattr(module, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(set(globals()) | set(_SUBMODULES) | set(_EXPORTS))
