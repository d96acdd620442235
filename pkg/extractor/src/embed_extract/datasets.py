"""Image dataset registry.

Covers the nine benchmark datasets: torchvision downloads where available
(cifar10, cifar100, stl10, food101, flowers102), ImageFolder layouts for the
rest (imagenet, snacks, stanforddogs, tinyimagenet) via ``imagefolder:<root>``
or a conventional ``<data_root>/<name>/<split>`` tree, plus a deterministic
``fake:<n>:<k>`` dataset for tests that needs neither downloads nor disk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from PIL import Image


@dataclass
class ImageSource:
    dataset_id: str
    split: str
    n_classes: int
    items: object  # indexable of (PIL image, int label 0-based)

    def __len__(self) -> int:
        return len(self.items)


class _FakeImages:
    """Seeded random RGB images; index-stable regardless of access order."""

    def __init__(self, n: int, k: int, size: int = 48):
        self.n, self.k, self.size = n, k, size

    def __len__(self):
        return self.n

    def __getitem__(self, idx):
        if not 0 <= idx < self.n:
            raise IndexError(idx)
        rng = np.random.default_rng((987654321, idx))
        pixels = rng.integers(0, 256, size=(self.size, self.size, 3), dtype=np.uint8)
        return Image.fromarray(pixels), int(idx % self.k)


_TORCHVISION = {
    "cifar10": ("CIFAR10", 10, {"train": {"train": True}, "test": {"train": False}}),
    "cifar100": ("CIFAR100", 100, {"train": {"train": True}, "test": {"train": False}}),
    "stl10": ("STL10", 10, {"train": {"split": "train"}, "test": {"split": "test"}}),
    "food101": ("Food101", 101, {"train": {"split": "train"}, "test": {"split": "test"}}),
    "flowers102": ("Flowers102", 102, {"train": {"split": "train"}, "test": {"split": "test"}}),
}

_IMAGEFOLDER_IDS = {"imagenet": 1000, "snacks": 20, "stanforddogs": 120, "tinyimagenet": 200}


def load_dataset(dataset_id: str, split: str, data_root: str) -> ImageSource:
    if dataset_id.startswith("fake:"):
        parts = dataset_id.split(":")
        n, k = int(parts[1]), int(parts[2])
        return ImageSource(dataset_id, split, k, _FakeImages(n, k))

    if dataset_id.startswith("imagefolder:"):
        from torchvision.datasets import ImageFolder

        root = dataset_id.split(":", 1)[1]
        ds = ImageFolder(f"{root}/{split}")
        return ImageSource(dataset_id, split, len(ds.classes), ds)

    if dataset_id in _TORCHVISION:
        import torchvision.datasets as tvd

        cls_name, k, split_map = _TORCHVISION[dataset_id]
        if split not in split_map:
            raise ValueError(f"{dataset_id} has no split {split!r}")
        ds = getattr(tvd, cls_name)(root=data_root, download=True, **split_map[split])
        return ImageSource(dataset_id, split, k, ds)

    if dataset_id in _IMAGEFOLDER_IDS:
        from torchvision.datasets import ImageFolder

        ds = ImageFolder(f"{data_root}/{dataset_id}/{split}")
        k = _IMAGEFOLDER_IDS[dataset_id]
        if len(ds.classes) != k:
            raise ValueError(
                f"{dataset_id} folder has {len(ds.classes)} classes, expected {k}"
            )
        return ImageSource(dataset_id, split, k, ds)

    raise ValueError(f"unknown dataset {dataset_id!r}")


class TransformedSource(torch.utils.data.Dataset):
    """Applies the backbone transform lazily inside the data loader."""

    def __init__(self, source: ImageSource, transform, limit: int | None = None):
        self.source = source
        self.transform = transform
        self.n = len(source) if limit is None else min(limit, len(source))

    def __len__(self):
        return self.n

    def __getitem__(self, idx):
        image, label = self.source.items[idx]
        return self.transform(image), int(label)
