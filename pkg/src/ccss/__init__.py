"""Silhouette identification via concavity-convexity scale space descriptors.

Pipeline: binary mask -> morphological cleanup -> closed contour ->
arc-length-normalized silhouette -> scale-space descriptor (curvature
extrema valued by lobe depth, positioned by deck projection, shallow
lobes filtered) -> per-row optimal-assignment matching -> ranked model
retrieval. Exposed as a library, a CLI (`ccss`), and an HTTP service.
"""

from .contour import (
    Silhouette,
    curvature,
    deck_project,
    detect_bow_stern,
    mirror_mask,
    mirror_silhouette,
    resample,
    smooth,
    trace_boundary,
)
from .database import (
    DatabaseParams,
    ModelDatabase,
    ModelRecord,
    build_from_directory,
    extract_silhouette,
    load,
    save,
)
from .errors import (
    CCSSError,
    DatabaseFormatError,
    DegenerateObjectError,
    DegenerateSilhouetteError,
    EmptyDatabaseError,
    EmptyMaskError,
    ScheduleMismatchError,
    SingularPointError,
)
from .evaluation import EvalReport, run_eval
from .matching import (
    MatchParams,
    MatchResult,
    match_cost,
    mirror_ccss,
    mirror_min,
    rmm_matrix,
    rmm_optimal_cost,
    row_cost,
    shift_correction,
)
from .morphology import (
    PreprocessParams,
    closing,
    disc_element,
    fill_holes,
    load_mask,
    opening_with_reconstruction,
    preprocess,
    save_mask,
)
from .scalespace import (
    CCSSImage,
    CSSImage,
    ScaleSchedule,
    build_ccss,
    build_ccss_until_convex,
    build_css,
    lobe_concavity,
    make_schedule,
    threshold_shallow,
    zero_crossings,
)

__version__ = "0.1.0"
