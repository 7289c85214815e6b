"""Quantum error-correcting codes through decoding inner products."""

from .errors import (
    CompletenessViolation,
    DegenerateGram,
    EmptyCode,
    InternalMismatch,
    MathematicalFailure,
    NotDecodable,
    NotPartialIsometry,
    NotPowerPartialIsometry,
    NotReducing,
    NotShift,
    QECError,
    ValidationError,
)
from .linalg import DEFAULT_TOL, Subspace, Tolerance, is_partial_isometry
from .dip import DecodingGram, OperatorSpan, compute_gram, phi_onb
from .qecc import (
    CorrectingCode,
    DensityState,
    QuantumChannel,
    decoding_noise_basis,
    kl_check,
    random_instance,
    synthesize_channel,
    verify_decoding,
)
from .wold import WoldDecomposition, code_bound, example_v15, shift_power_code, wandering_space, wold_decompose
from .cyclic import clock_operator, fourier_operator, shift_operator, weyl_operator
from .reducing import Partition, block_decoder, check_reducing

__version__ = "0.1.0"
