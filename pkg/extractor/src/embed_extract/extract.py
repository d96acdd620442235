"""Batched frozen-backbone extraction into a DALB file."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch

from .backbones import load_backbone
from .dalb import write_dalb
from .datasets import TransformedSource, load_dataset

log = logging.getLogger(__name__)


@dataclass
class ExtractionJob:
    dataset: str
    split: str
    out: str
    backbone: str = "dinov2_vits14"
    device: str = "auto"
    batch_size: int = 256
    limit: int | None = None
    data_root: str = "./data"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.limit is not None and self.limit < 1:
            raise ValueError("limit must be >= 1 when given")
        if self.device == "auto":
            self.device = "cuda" if torch.cuda.is_available() else "cpu"


def extract(job: ExtractionJob) -> None:
    """Run the job and write one DALB file; never leaves partial output.

    Deterministic for fixed weights and preprocessing: the loader walks the
    dataset in index order with no augmentation, and inference runs under
    ``torch.no_grad`` in eval mode.
    """
    backbone = load_backbone(job.backbone, job.device)
    source = load_dataset(job.dataset, job.split, job.data_root)
    dataset = TransformedSource(source, backbone.transform, job.limit)
    loader = torch.utils.data.DataLoader(
        dataset, batch_size=job.batch_size, shuffle=False, num_workers=0
    )
    log.info(
        "extracting %d instances of %s/%s with %s on %s",
        len(dataset), job.dataset, job.split, backbone.backbone_id, job.device,
    )
    feature_blocks = []
    label_blocks = []
    for images, labels in loader:
        embedded = backbone.embed(images.to(job.device))
        feature_blocks.append(embedded.cpu().numpy().astype(np.float32))
        label_blocks.append(labels.numpy())
    features = np.concatenate(feature_blocks, axis=0)
    labels0 = np.concatenate(label_blocks, axis=0)
    if features.shape[1] != backbone.dim:
        raise RuntimeError(
            f"backbone produced width {features.shape[1]}, declared {backbone.dim}"
        )
    metadata = {
        "name": source.dataset_id,
        "source": "embed-extract",
        "split": job.split,
        "backbone": backbone.backbone_id,
        "preprocess": backbone.preprocess_desc,
        "limit": job.limit,
    }
    write_dalb(job.out, features, labels0, source.n_classes, metadata)
    log.info("wrote %s (n=%d, d=%d, k=%d)", job.out, len(labels0), features.shape[1], source.n_classes)
