"""Matrix-product thermofield doubles: imaginary-time evolution, entanglement and bounds."""

from .errors import (DataError, DimensionError, DomainError, NumericalError, ParameterError,
                     ParseError, RangeError, ResourceExhaustedError, SizeError)
from .evolution import EvolutionConfig, TrotterPlan, build_trotter_plan, evolve, gate_exponential
from .models import ModelSpec, bilinear_biquadratic, bose_hubbard, build_bond_terms, heisenberg, xxz
from .mps import (BondSpectrum, PurificationMPS, build_infinite_temperature_tds, canonicalize,
                  load_checkpoint, renyi_entropy, save_checkpoint, schmidt_spectrum, truncate_to)

__version__ = "0.1.0"

__all__ = [
    "BondSpectrum", "DataError", "DimensionError", "DomainError", "EvolutionConfig",
    "ModelSpec", "NumericalError", "ParameterError", "ParseError", "PurificationMPS",
    "RangeError", "ResourceExhaustedError", "SizeError", "TrotterPlan",
    "bilinear_biquadratic", "bose_hubbard", "build_bond_terms",
    "build_infinite_temperature_tds", "build_trotter_plan", "canonicalize", "evolve",
    "gate_exponential", "heisenberg", "load_checkpoint", "renyi_entropy", "save_checkpoint",
    "schmidt_spectrum", "truncate_to", "xxz",
]
