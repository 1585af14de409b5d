"""blastsel: feature selection and classification for blast-cell image features.

Ingests precomputed feature matrices, scores features with filter methods,
refines subsets with GA / binary-ACO / hybrid search, trains small classifiers
and reports the standard binary metrics. Also ships the image preprocessing
used to produce model-ready 224x224 cell crops.
"""

__version__ = "0.1.0"

from . import classifiers, core, errors, filters, imgprep, metaheuristics, metrics, pipeline

__all__ = [
    "__version__",
    "classifiers",
    "core",
    "errors",
    "filters",
    "imgprep",
    "metaheuristics",
    "metrics",
    "pipeline",
]
