"""Exact, certificate-producing combinatorics of finite group actions.

Image sets, symmetry sets, action energy, covering constructions, and a
constructive decomposition pipeline for sets of rich transformations,
all over exact integer and rational arithmetic.  The counting kernels
have a compiled fast path with a pure fallback (see actcomb.kernels).
"""

from .actions import (
    AffineFpAction,
    CosetSpaceAction,
    DiagonalPowerAction,
    IntegerTranslationAction,
    LinearActionQ,
    LinearFpAction,
    PermutationNaturalAction,
    ProjectiveSL2Action,
    SelfTranslationAction,
    cyclic_translation,
    generate_set,
    generated_subgroup,
    make_action,
)
from .core import (
    ActcombError,
    CanonSet,
    CapabilityError,
    ClosureCapError,
    CountMap,
    DescriptorError,
    ElementSet,
    GroupAction,
    HypothesisError,
    PointSet,
    Relation,
    VerificationError,
    count_map,
    exact_image_case,
    fixed_in,
    image_set,
    inverse_set,
    partial_image_set,
    product_set,
    set_stabilizer_in,
    stabilizer_in,
    symmetrized_power,
    transporter_in,
)
from .kernels import BACKEND as KERNEL_BACKEND

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
