"""Noise-adaptive label cleaning for 3d point cloud segmentation."""

from ._core import (
    ClusterSet,
    Scene,
    dbscan,
    edge_inner_accuracy,
    generate_scene,
    inject_asymmetric_pairs,
    inject_boundary,
    inject_mixed_asymmetric,
    inject_symmetric,
    knn,
    load_scene,
    mean_iou,
    overall_accuracy,
    run_pipeline,
    save_scene,
)

__all__ = [
    "ClusterSet",
    "Scene",
    "dbscan",
    "edge_inner_accuracy",
    "generate_scene",
    "inject_asymmetric_pairs",
    "inject_boundary",
    "inject_mixed_asymmetric",
    "inject_symmetric",
    "knn",
    "load_scene",
    "mean_iou",
    "overall_accuracy",
    "run_pipeline",
    "save_scene",
]
