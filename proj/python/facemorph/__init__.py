"""Landmark morphometry for pre/post facial surgery comparisons."""

import json

from ._core import (
    CANVAS_SIZE,
    LANDMARK_COUNT,
    AlignedFace,
    FacemorphError,
    IdealProfile,
    LandmarkScheme,
    NasalFeatureVector,
    NasalImprovement,
    OperatingPoint,
    OutcomeCategory,
    SymmetryResult,
    TTestResult,
    WilcoxonResult,
    align_inner_eyes,
    align_outer_eyes,
    categorize,
    cosine_similarity,
    improvement,
    nasal_features,
    paired_t_test,
    read_record,
    roc,
    symmetry_score,
    synth,
    tmr_at_fmr,
    validate,
    wilcoxon_signed_rank,
)
from ._core import analyze_json


def analyze(manifest, out, **options):
    """Run the full pipeline and return the cohort report as a dict."""
    return json.loads(analyze_json(str(manifest), str(out), **options))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
