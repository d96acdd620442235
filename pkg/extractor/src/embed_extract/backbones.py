"""Frozen feature-extraction backbones.

The default is the self-supervised ViT-S/14 ("dinov2_vits14", 384-d CLS
embedding) fetched through torch.hub; weight download requires network
access. A deterministic ``stub:<dim>`` backbone exists for tests and smoke
runs: a seeded random projection over pooled pixels that needs no weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torchvision import transforms

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


@dataclass
class Backbone:
    """A frozen embedding model plus its preprocessing pipeline."""

    backbone_id: str
    dim: int
    transform: transforms.Compose
    module: torch.nn.Module
    preprocess_desc: str

    @torch.no_grad()
    def embed(self, batch: torch.Tensor) -> torch.Tensor:
        return self.module(batch)


class _StubNet(torch.nn.Module):
    """Seeded fixed random projection; deterministic and weight-free."""

    def __init__(self, dim: int):
        super().__init__()
        self.pool = torch.nn.AdaptiveAvgPool2d((8, 8))
        generator = torch.Generator().manual_seed(1234)
        self.register_buffer(
            "projection", torch.randn(3 * 8 * 8, dim, generator=generator) / (3 * 8 * 8) ** 0.5
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        pooled = self.pool(x).flatten(1)
        return pooled @ self.projection


def _standard_transform(resize: int, crop: int) -> transforms.Compose:
    return transforms.Compose(
        [
            transforms.Resize(resize, interpolation=transforms.InterpolationMode.BICUBIC),
            transforms.CenterCrop(crop),
            transforms.Lambda(lambda img: img.convert("RGB")),
            transforms.ToTensor(),
            transforms.Normalize(IMAGENET_MEAN, IMAGENET_STD),
        ]
    )


def load_backbone(backbone_id: str, device: str) -> Backbone:
    if backbone_id.startswith("stub:"):
        dim = int(backbone_id.split(":", 1)[1])
        module = _StubNet(dim).to(device).eval()
        return Backbone(
            backbone_id=backbone_id,
            dim=dim,
            transform=_standard_transform(64, 64),
            module=module,
            preprocess_desc="resize 64, center crop 64, imagenet normalization",
        )
    if backbone_id == "dinov2_vits14":
        try:
            module = torch.hub.load("facebookresearch/dinov2", "dinov2_vits14")
        except Exception as exc:  # hub failures surface as many exception types
            raise RuntimeError(
                f"could not load pretrained weights for {backbone_id!r}; "
                f"network access to torch.hub is required ({exc})"
            ) from exc
        module = module.to(device).eval()
        return Backbone(
            backbone_id=backbone_id,
            dim=384,
            transform=_standard_transform(256, 224),
            module=module,
            preprocess_desc="resize 256 bicubic, center crop 224, imagenet normalization",
        )
    raise ValueError(f"unknown backbone {backbone_id!r} (expected dinov2_vits14 or stub:<dim>)")
