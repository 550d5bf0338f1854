"""Companion matrices, elliptic norms, ratio thresholds and decay certificates for BDF3."""

from .companion import (
    Companion2x2,
    HNormConfig,
    alpha,
    alpha_partials,
    beta,
    beta_partials,
    disk_condition,
    eigen_moduli,
    g_function,
    h0_norm,
    h_norm,
    h_norm_direct,
)
from .thresholds import ThresholdRoots, format_complex, positive_roots, threshold_roots
from .lemmas import LemmaMargin, LemmaReport, verify_lemmas
from .certificate import StabilityCertificate, decay_certificate
