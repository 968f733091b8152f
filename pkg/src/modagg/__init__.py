"""Exact modular spaces over step functions and their aggregation functions."""

from __future__ import annotations

__version__ = "0.1.0"

from .extreal import INF, ONE, ZERO, ExtReal, parse_extreal
from .nabla import NotNonincreasing, StepFn, constant, leq_oplus, lift, oplus
from .quantale import LAWVERE, NABLA, TWO, Product, VCat, is_asym_triplet, is_triplet, vcat_check
from .modular import (
    AggregationFailure,
    FiniteQpm,
    ModularSpace,
    example_mods,
    from_gd,
    from_vcat,
    product,
    set_aggregate,
    to_vcat,
    validate,
)
from .aggregator import Aggregator, builtin, from_spec, parse
from .properties import Sampler, Verdict, Witness, classify, transfer_witness
from .harness import default_battery, harness, verify, witness_space

__all__ = [
    "__version__",
    "ExtReal", "INF", "ONE", "ZERO", "parse_extreal",
    "StepFn", "NotNonincreasing", "constant", "oplus", "leq_oplus", "lift",
    "TWO", "LAWVERE", "NABLA", "Product", "VCat", "is_asym_triplet", "is_triplet", "vcat_check",
    "ModularSpace", "FiniteQpm", "AggregationFailure", "validate", "from_gd", "example_mods",
    "product", "set_aggregate", "to_vcat", "from_vcat",
    "Aggregator", "builtin", "parse", "from_spec",
    "Sampler", "Verdict", "Witness", "classify", "transfer_witness",
    "harness", "verify", "default_battery", "witness_space",
]
