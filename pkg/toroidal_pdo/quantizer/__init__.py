from toroidal_pdo.quantizer.quantizer import CutoffKind, FrequencyCutoff, KernelField, adjoint_apply, apply, \
    kernel, kernel_at_pairs, ladder_scales, lp_kernel_piece, t_star_one
from toroidal_pdo.quantizer.kernel_estimates import AnnulusEstimate, DConditionReport, annulus_kernel_estimate, \
    d_condition_check, probe_set
