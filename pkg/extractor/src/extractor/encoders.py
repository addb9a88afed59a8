"""Frozen image encoders.

An encoder has a `name`, a declared output width `dim`, and
`encode(images) -> float32 array of shape (len(images), dim)`. It is
inference-only: weights are never updated here. Encoders are registered
by identifier; `vitb32` is the CLIP ViT-B/32 visual tower with its own
published preprocessing (no extra augmentation at extraction time).
"""

from __future__ import annotations

import numpy as np


class EncoderError(RuntimeError):
    """Encoder unavailable or produced the wrong shape."""


_REGISTRY: dict = {}


def register_encoder(name: str, factory) -> None:
    """Register `factory() -> encoder` under `name`."""
    _REGISTRY[name] = factory


def get_encoder(name: str):
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise EncoderError(
            f"unknown encoder {name!r}; known: {sorted(_REGISTRY)}") from None
    return factory()


class ClipVisionEncoder:
    """CLIP visual tower via transformers, projected to the shared
    embedding space (512-d for ViT-B/32)."""

    def __init__(self, model_id: str = "openai/clip-vit-base-patch32"):
        try:
            import torch
            from transformers import CLIPImageProcessor, CLIPVisionModelWithProjection
        except ImportError as e:
            raise EncoderError(f"torch/transformers required: {e}") from None
        self._torch = torch
        try:
            self._processor = CLIPImageProcessor.from_pretrained(model_id)
            self._model = CLIPVisionModelWithProjection.from_pretrained(model_id)
        except Exception as e:
            raise EncoderError(f"could not obtain weights for {model_id}: {e}") from None
        self._model.eval()
        for p in self._model.parameters():
            p.requires_grad_(False)
        self.name = "vitb32"
        self.dim = int(self._model.config.projection_dim)

    def encode(self, images) -> np.ndarray:
        inputs = self._processor(images=list(images), return_tensors="pt")
        with self._torch.no_grad():
            out = self._model(**inputs).image_embeds
        return out.cpu().numpy().astype(np.float32)


register_encoder("vitb32", ClipVisionEncoder)
