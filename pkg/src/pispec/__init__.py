"""Spectral points of type pi+/pi- for G-symmetric matrices.

The modules cover the indefinite product and subspace ranks (``core``),
Jordan chains and point verdicts (``jordan``), the refined subspace
decomposition and finite-rank type correction (``aps``), local spectral
projections (``spectral``), resolvent growth (``resolvent``), ground-truth
pairs (``gallery``) and file handling (``io``, ``cli``).
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    FundamentalDecomposition, GramSpace, MarginField, Subspace, compress_gram,
    definiteness_margin, fundamental_decomposition, indefinite_product, isotropic_part,
    orthogonal_companion, uniform_definiteness_delta,
)
from .errors import (  # noqa: E402
    AtSpectrum, ContourThroughSpectrum, EndpointInSpectrum, HypothesisViolated, InputError,
    LoadError, NoKernel, PairingDegenerate, PispecError, QuadratureStagnation, RankAmbiguous,
)
from .jordan import (  # noqa: E402
    JordanStructure, RegionReport, TypeClassification, Verdict, classify_point, jordan_chains,
    jordan_structures, kernel_basis, scan_interval, sign_characteristic,
)
from .gallery import (  # noqa: E402
    Block, CanonicalSpec, TruncationFamily, canonical_pair, random_g_symmetric,
    truncation_family,
)
from .aps import (  # noqa: E402
    ApsDecomposition, PerturbationReport, aps_decompose, build_type_perturbation,
    perturbation_stability_lab,
)
from .spectral import (  # noqa: E402
    Contour, SpectralProjection, local_spectral_function, riesz_projection, verify_axioms,
)
from .resolvent import GrowthEstimate, growth_order, interval_bound_check, resolvent_norm  # noqa: E402
from .io import load_problem, save_problem  # noqa: E402
