"""Descriptive statistics (class summary table) and the radial plot SVG."""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from .trips import FEATURE_NAMES, LifeSpaceVector

logger = logging.getLogger(__name__)

CLASS_ORDER = ("MCI_AD", "CU")

#: Short axis labels for the radial plot.
_AXIS_LABELS = {
    "home_wkd": "HT-WKD", "home_wkn": "HT-WKN",
    "work_wkd": "WT-WKD", "work_wkn": "WT-WKN",
    "errand_wkd": "ET-WKD", "errand_wkn": "ET-WKN",
    "medical_wkd": "MT-WKD", "medical_wkn": "MT-WKN",
    "social_wkd": "ST-WKD", "social_wkn": "ST-WKN",
    "unknown_wkd": "UT-WKD", "unknown_wkn": "UT-WKN",
}


def class_summary(vectors: Sequence[LifeSpaceVector]
                  ) -> list[tuple[str, str, float, float, int]]:
    """Rows of (ca_label, variable, mean, sd, n); n-1 standard deviation,
    with a single-member class flagged and given SD 0 by convention."""
    rows: list[tuple[str, str, float, float, int]] = []
    for cls in CLASS_ORDER:
        members = [v for v in vectors if v.ca_label == cls]
        if not members:
            continue
        if len(members) == 1:
            logger.warning("class %s has a single driver; SD reported as 0", cls)
        data = np.array([v.features for v in members])
        for j, name in enumerate(FEATURE_NAMES):
            mean = float(data[:, j].mean())
            sd = float(data[:, j].std(ddof=1)) if len(members) > 1 else 0.0
            rows.append((cls, name, mean, sd, len(members)))
    return rows


def write_class_summary(rows, stream) -> None:
    stream.write("ca_label,variable,mean,sd,n\n")
    for cls, name, mean, sd, n in rows:
        stream.write(f"{cls},{name},{mean:.6f},{sd:.6f},{n}\n")


def radial_svg(vectors: Sequence[LifeSpaceVector]) -> str:
    """One spider panel per class over the twelve variables, sharing an axis
    maximum of 1.1x the largest class mean. Geometry is deterministic."""
    means: dict[str, np.ndarray] = {}
    for cls in CLASS_ORDER:
        members = [v for v in vectors if v.ca_label == cls]
        if members:
            means[cls] = np.array([v.features for v in members]).mean(axis=0)
    if not means:
        raise ValueError("no labeled drivers to plot")
    axis_max = max(float(m.max()) for m in means.values()) * 1.1
    if axis_max <= 0.0:
        axis_max = 1.0

    panel_w, panel_h = 440, 440
    cx0, cy, radius = 220, 230, 150
    width = panel_w * len(means)
    colors = {"MCI_AD": "#c0392b", "CU": "#2471a3"}

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{panel_h}" viewBox="0 0 {width} {panel_h}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    k = len(FEATURE_NAMES)
    for panel, (cls, mean) in enumerate(means.items()):
        cx = cx0 + panel * panel_w
        parts.append(f'<text x="{cx}" y="28" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="16">{cls}</text>')
        for ring in (0.25, 0.5, 0.75, 1.0):
            pts = []
            for j in range(k):
                ang = -math.pi / 2 + 2 * math.pi * j / k
                pts.append(f"{cx + radius * ring * math.cos(ang):.3f},"
                           f"{cy + radius * ring * math.sin(ang):.3f}")
            parts.append(f'<polygon points="{" ".join(pts)}" fill="none" '
                         'stroke="#d5d8dc" stroke-width="1"/>')
        for j, name in enumerate(FEATURE_NAMES):
            ang = -math.pi / 2 + 2 * math.pi * j / k
            x2 = cx + radius * math.cos(ang)
            y2 = cy + radius * math.sin(ang)
            parts.append(f'<line x1="{cx}" y1="{cy}" x2="{x2:.3f}" y2="{y2:.3f}" '
                         'stroke="#aab7b8" stroke-width="1"/>')
            lx = cx + (radius + 24) * math.cos(ang)
            ly = cy + (radius + 24) * math.sin(ang)
            parts.append(f'<text x="{lx:.3f}" y="{ly:.3f}" text-anchor="middle" '
                         'font-family="sans-serif" font-size="10">'
                         f'{_AXIS_LABELS[name]}</text>')
        pts = []
        for j in range(k):
            ang = -math.pi / 2 + 2 * math.pi * j / k
            r = radius * float(mean[j]) / axis_max
            pts.append(f"{cx + r * math.cos(ang):.3f},{cy + r * math.sin(ang):.3f}")
        color = colors.get(cls, "#555555")
        parts.append(f'<polygon points="{" ".join(pts)}" fill="{color}" '
                     f'fill-opacity="0.35" stroke="{color}" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
