"""Life-space trip features from naturalistic drives, plus a resampled
classifier harness for cognitive-ability screening.

Subpackages/modules map onto the pipeline stages: geo (geohash and
distance primitives), ingest (parsing and preprocessing filters), trips
(destination labeling and the twelve features), learn (classifiers),
resample (the evaluation protocol), synthcohort (synthetic data), report
and cli (outputs and orchestration).
"""

from .errors import LifeSpaceError
from .geo import (BoundingBox, GeoPoint, Geohash, center, decode_bbox, encode,
                  haversine_miles)
from .ingest import (DriveRecord, DriverProfile, PreprocessConfig,
                     RemovalReport, effective_days, parse_cohort, parse_drives,
                     preprocess)
from .trips import (CategoryCounts, FEATURE_NAMES, LifeSpaceVector,
                    LocationBook, TripLabel, apply_relabels,
                    build_location_book, compute_life_space, count_categories,
                    exclude_low_activity, label_trip)

__version__ = "0.1.0"

__all__ = [
    "LifeSpaceError", "BoundingBox", "GeoPoint", "Geohash", "center",
    "decode_bbox", "encode", "haversine_miles", "DriveRecord", "DriverProfile",
    "PreprocessConfig", "RemovalReport", "effective_days", "parse_cohort",
    "parse_drives", "preprocess", "CategoryCounts", "FEATURE_NAMES",
    "LifeSpaceVector", "LocationBook", "TripLabel", "apply_relabels",
    "build_location_book", "compute_life_space", "count_categories",
    "exclude_low_activity", "label_trip", "__version__",
]
