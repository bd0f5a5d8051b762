"""Scale-adaptive token pipeline for multi-person 3D human mesh estimation."""

import json

from ._satkit import (
    BodyModel,
    SatkitError,
    assemble,
    attention_cost,
    build_gt_scale_map,
    classify,
    evaluate_scene,
    focal_from_fov,
    focal_loss,
    forward_scene,
    giou,
    hungarian,
    iou,
    loss_box,
    loss_depth,
    make_mini_model,
    mpjpe,
    normalized_errors,
    pa_mpjpe,
    partition,
    pck,
    person_scale,
    procrustes_align,
    project,
    token_counts,
)

BACKGROUND, SMALL, LARGE = 0, 1, 2


def run_forward(scene, config=None, seed=0, gt_scale_map=False):
    """Forward pass on a scene dict; returns (prediction-set dict, token counts)."""
    text, counts = forward_scene(json.dumps(scene), json.dumps(config) if config else "", seed, gt_scale_map)
    return json.loads(text), counts


def evaluate(scene, predictions, config=None):
    """Evaluation report dict for a scene dict and a prediction-set dict."""
    return json.loads(evaluate_scene(json.dumps(scene), json.dumps(predictions), json.dumps(config) if config else ""))


__all__ = [name for name in dir() if not name.startswith("_")]
