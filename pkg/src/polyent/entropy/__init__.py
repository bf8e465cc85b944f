"""Polynomial entropy estimation: orbit clouds, greedy counts, slopes and codings."""
from .clouds import (
    OrbitCloud,
    cloud_from_finsets,
    cloud_from_points,
    cloud_from_susp,
    cloud_from_tuples,
    fundamental_anchors,
    grid_cloud,
    hyper_cloud,
    product_cloud,
    susp_cloud,
    transit_cloud,
    tuple_cloud,
)
from .estimator import (
    CountRecord,
    DynMetricContext,
    SlopeRow,
    SlopeTable,
    cloud_counts,
    cloud_distance_matrix,
    cloud_dyn_distance,
    cloud_greedy,
    dyn_distance,
    estimate_hpol,
    fit_window,
    greedy_cover,
    greedy_separated,
    greedy_separated_set,
    slope_fit,
    slope_table,
)
from .coding import Y_INF, CodingFamily, Letter, WordCensus, box_letter, code_orbit, word_census
