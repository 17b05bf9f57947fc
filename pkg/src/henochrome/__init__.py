"""Exact henochromatic fields lifted from paraxial beam envelopes."""
from .exact import (
    MonochromaticField,
    PlaneWaveProfile,
    decompose_heno,
    evaluate_mc_field,
    mc_complete,
    plane_wave_field,
    reconstruct_from_heno,
    relativistic_inner_product_reduced,
)
from .gauge import (
    HenoAmplitude,
    evaluate_heno_field,
    gauge_residual,
    heno_lift,
    kappa,
    omega,
)
from .grid import (
    ComplexVectorField,
    TransverseGrid,
    forward_transform,
    inner_product,
    inverse_transform,
)
from .paraxial import (
    Carrier,
    ParaxialMode,
    envelope_inner_product,
    hermite_gauss,
    laguerre_gauss,
    paraxial_residual,
    propagate_envelope,
)
from .verify import VerificationReport, run_suite

__version__ = "0.1.0"
