"""Debug-only JSON dumps of trained models. Not a stability contract."""

from __future__ import annotations

import json

from .boost import C50Model
from .forest import RFModel
from .svm import SVMModel
from .tree import Tree


def _tree_dict(tree: Tree, node: int = 0) -> dict:
    if tree.feature[node] < 0:
        return {"leaf": True,
                "class": int(tree.w1[node] >= tree.w0[node]),
                "weights": [float(tree.w0[node]), float(tree.w1[node])],
                "n_cases": int(tree.n_cases[node])}
    return {"leaf": False,
            "feature": int(tree.feature[node]),
            "threshold": float(tree.threshold[node]),
            "n_cases": int(tree.n_cases[node]),
            "left": _tree_dict(tree, int(tree.left[node])),
            "right": _tree_dict(tree, int(tree.right[node]))}


def model_debug_json(model) -> str:
    """Serialize a trained classifier for inspection."""
    if isinstance(model, C50Model):
        payload = {"variant": "c50",
                   "trials": len(model.trees),
                   "stage_weights": model.stage_weights,
                   "trees": [_tree_dict(t) for t in model.trees]}
    elif isinstance(model, RFModel):
        trees = []
        for t in range(model.n_trees):
            lo, hi = int(model.offsets[t]), int(model.offsets[t + 1])
            trees.append(_tree_dict(Tree(
                model.feature[lo:hi], model.threshold[lo:hi],
                model.left[lo:hi], model.right[lo:hi],
                model.n_cases[lo:hi], model.w0[lo:hi], model.w1[lo:hi])))
        payload = {"variant": "rf", "n_trees": model.n_trees,
                   "mtry": model.params.mtry, "trees": trees}
    elif isinstance(model, SVMModel):
        payload = {"variant": "svm",
                   "kernel": model.params.kernel,
                   "c": model.params.c,
                   "gamma": model.params.gamma,
                   "bias": model.bias,
                   "degenerate": model.degenerate,
                   "standardization": {"mean": model.mean.tolist(),
                                       "scale": model.scale.tolist()},
                   "support_vectors": model.sv.tolist(),
                   "coefficients": model.sv_coef.tolist()}
    else:
        raise TypeError(f"cannot dump {type(model).__name__}")
    return json.dumps(payload, indent=2, sort_keys=True)
