"""Low-degree testing laboratory for planted-community random graph models.

Exact evaluation of the recursive r-value algebra and the degree-D
advantage upper bounds for two observation models (additive Gaussian and
binary), plus samplers, easy-regime test statistics, and a reproducible
experiment CLI.
"""

from .advantage import (AdvQuery, AdvantageReport, adv_bound, adv_bound_binary,
                        adv_bound_gaussian, exact_adv_oracle, series_bound)
from .graphs import (ClassCatalog, ExponentVector, MultigraphClass, SizeLimitError,
                     alpha_factorial, canonicalize, disjoint_union, enumerate_classes,
                     labeled_copy_count, sub_multigraphs)
from .models import (BinaryParams, GaussianParams, LabelAssignment, PriorSpec, Sample,
                     mean_matrix, sample_binary, sample_gaussian, sample_labels,
                     write_sample_csv)
from .moments import MomentValue, affine_moment, base_moment, mc_moment
from .numeric import derive_rng, derive_seed
from .rvalues import RTable, r_bound_check, r_transform, r_value, r_value_naive
from .stats import (TestStatReport, diag_moments, diag_sum, run_experiment,
                    signed_triangles, signed_triangles_exact, signed_triangles_naive,
                    tri_moments)

__version__ = "0.1.0"

__all__ = [
    "AdvQuery", "AdvantageReport", "adv_bound", "adv_bound_binary",
    "adv_bound_gaussian", "exact_adv_oracle", "series_bound",
    "ClassCatalog", "ExponentVector", "MultigraphClass", "SizeLimitError",
    "alpha_factorial", "canonicalize", "disjoint_union", "enumerate_classes",
    "labeled_copy_count", "sub_multigraphs",
    "BinaryParams", "GaussianParams", "LabelAssignment", "PriorSpec", "Sample",
    "mean_matrix", "sample_binary", "sample_gaussian", "sample_labels",
    "write_sample_csv",
    "MomentValue", "affine_moment", "base_moment", "mc_moment",
    "derive_rng", "derive_seed",
    "RTable", "r_bound_check", "r_transform", "r_value", "r_value_naive",
    "TestStatReport", "diag_moments", "diag_sum", "run_experiment",
    "signed_triangles", "signed_triangles_exact", "signed_triangles_naive",
    "tri_moments",
]
