"""Chebyshev's root-finding map: construction, degree theory, fixed points and dynamics."""

__version__ = "0.1.0"

from .chebyshev import (  # noqa: E402
    INF,
    RationalMap,
    apply,
    build_chebyshev,
    build_chebyshev_derivative,
    build_halley,
    build_L,
    local_degree,
)
from .config import DEFAULTS, Defaults  # noqa: E402
from .degree import DegreeBreakdown, degree_audit, make_corpus, predicted_degree, special_critical_points  # noqa: E402
from .dynamics import (  # noqa: E402
    AttractorSet,
    OrbitTrace,
    connectivity_evidence,
    critical_orbit_audit,
    iterate,
    pole_boundary_probe,
    unboundedness_probe,
)
from .errors import (  # noqa: E402
    AmbiguousClassification,
    ChebdynError,
    DegenerateInput,
    ForbiddenLambda,
    Indeterminate,
    NonConvergence,
)
from .fixed_points import (  # noqa: E402
    FixedPointRecord,
    extraneous_via_L,
    find_fixed_points,
    multiplier_formula_infinity,
    multiplier_formula_root,
)
from .lambda_family import (  # noqa: E402
    LambdaFamilyRecord,
    c_lambda,
    extraneous_quartic,
    lemma_bound_audit,
    psi,
    twin_lambda,
)
from .poly import (  # noqa: E402
    AffineMap,
    Polynomial,
    RootCluster,
    derivative,
    evaluate,
    gcd_roots,
    normalize_monic_centered,
    roots,
)
from .render import BasinGrid, Viewport, encode_image, render_basins, symmetry_check  # noqa: E402
