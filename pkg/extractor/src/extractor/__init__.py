"""Turn image datasets into CLEB-v1 embedding stores with a frozen
image encoder.

The primary library (`realcl`) trains and evaluates on embedding stores;
this package produces the real ones. Datasets and encoders are looked up
by name in small registries so tests (and offline environments) can
inject deterministic substitutes.
"""

from .core import ExtractError, ExtractSpec, extract, sanity_report
from .datasets import DatasetSplits, get_dataset, register_dataset
from .encoders import get_encoder, register_encoder

__all__ = [
    "DatasetSplits",
    "ExtractError",
    "ExtractSpec",
    "extract",
    "get_dataset",
    "get_encoder",
    "register_dataset",
    "register_encoder",
    "sanity_report",
]

__version__ = "0.1.0"
