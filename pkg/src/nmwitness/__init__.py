"""Qubit under random external fields: dynamics, master equations and
non-Markovianity witnesses (BLP, RHP, ACH)."""
from .dynamics import RANDOM_FIELD_MAP, apply_map, choi_of_map, unitary_at
from .generators import (
    Generator,
    ach_operators_analytic,
    ach_rates_analytic,
    canonical_decompose,
    generator_dissipative,
    generator_nondissipative,
    reconstruct_generator_from_map,
)
from .witnesses import StatePair, ach_f, blp_sigma, rhp_g_analytic, rhp_g_numeric, trace_distance

__version__ = "0.1.0"
