"""Exact kernels of infinitely wide convolutional residual networks."""

from .arccos import kappa0, kappa1
from .conditioning import (
    ConditionReport,
    DoubleConstant,
    condition_bounds,
    depth_sweep,
    double_constant_of,
    gram,
    sym_eig,
    uniform_multisphere,
)
from .estimator import ResidualKernel
from .montecarlo import MCEstimate, mc_gpk, mc_ntk
from .multisphere import (
    cgpk_appendix_h,
    fc_res_gpk,
    fc_res_ntk,
    gpk_depth_profile,
    multisphere_kernels,
    rescgpk_multisphere_normalized,
    rescntk_multisphere_normalized,
    residual_gap_lower_bound,
)
from .network import NetworkConfig, NetworkParams, forward, grad_params, sample_params
from .params import KernelParams
from .recursion import LayerState, normalize, rescgpk, rescgpk_layers, rescntk, shift
from .spectral import (
    EigenEstimate,
    QuadratureGrid,
    SlopeFit,
    decay_slope,
    eigenvalue_estimate,
    eigenvalue_table,
    gegenbauer,
    theorem_sandwich_check,
)

__all__ = [
    "ConditionReport", "DoubleConstant", "EigenEstimate", "KernelParams", "LayerState",
    "MCEstimate", "NetworkConfig", "NetworkParams", "QuadratureGrid", "ResidualKernel",
    "SlopeFit", "cgpk_appendix_h", "condition_bounds", "decay_slope", "depth_sweep",
    "double_constant_of", "eigenvalue_estimate", "eigenvalue_table", "fc_res_gpk",
    "fc_res_ntk", "forward", "gegenbauer", "gpk_depth_profile", "grad_params", "gram",
    "kappa0", "kappa1", "mc_gpk", "mc_ntk", "multisphere_kernels", "normalize",
    "rescgpk", "rescgpk_layers", "rescgpk_multisphere_normalized", "rescntk",
    "rescntk_multisphere_normalized", "residual_gap_lower_bound", "sample_params",
    "shift", "sym_eig", "theorem_sandwich_check", "uniform_multisphere",
]
