"""Dataset loaders.

A dataset is a `DatasetSplits`: class names plus (images, labels) for
the canonical train and test splits. Loaders are registered by name;
the built-in ones download through torchvision on first use and are
therefore only importable where that stack (and network access) exists.

TinyImageNet note: the official test split is unlabeled, so the labeled
validation split is stored under the test tag. `sanity_report` records
the split sizes so this substitution is visible in the artifact.
"""

from __future__ import annotations

from dataclasses import dataclass


class DatasetError(RuntimeError):
    """Dataset unavailable or malformed."""


@dataclass
class DatasetSplits:
    name: str
    class_names: tuple
    train_images: list
    train_labels: list
    test_images: list
    test_labels: list

    def __post_init__(self):
        if len(self.train_images) != len(self.train_labels):
            raise DatasetError("train images/labels length mismatch")
        if len(self.test_images) != len(self.test_labels):
            raise DatasetError("test images/labels length mismatch")
        n = len(self.class_names)
        if any(not (0 <= l < n) for l in list(self.train_labels) + list(self.test_labels)):
            raise DatasetError("label outside class-name table")


_REGISTRY: dict = {}


def register_dataset(name: str, loader) -> None:
    """Register `loader(root) -> DatasetSplits` under `name`."""
    _REGISTRY[name] = loader


def get_dataset(name: str, root: str = "data/raw") -> DatasetSplits:
    try:
        loader = _REGISTRY[name]
    except KeyError:
        raise DatasetError(
            f"unknown dataset {name!r}; known: {sorted(_REGISTRY)}") from None
    return loader(root)


def _load_cifar(name: str, root: str) -> DatasetSplits:
    try:
        from torchvision import datasets as tvd
    except ImportError as e:
        raise DatasetError(f"torchvision required for {name}: {e}") from None
    cls = tvd.CIFAR10 if name == "cifar10" else tvd.CIFAR100
    try:
        train = cls(root, train=True, download=True)
        test = cls(root, train=False, download=True)
    except Exception as e:
        raise DatasetError(f"could not obtain {name}: {e}") from None
    return DatasetSplits(
        name=name,
        class_names=tuple(train.classes),
        train_images=[train[i][0] for i in range(len(train))],
        train_labels=[int(train[i][1]) for i in range(len(train))],
        test_images=[test[i][0] for i in range(len(test))],
        test_labels=[int(test[i][1]) for i in range(len(test))],
    )


def _load_tinyimagenet(root: str) -> DatasetSplits:
    """TinyImageNet-200 from the standard Stanford archive; the labeled
    validation split is used as the test split."""
    import urllib.request
    import zipfile
    from pathlib import Path

    try:
        from PIL import Image
    except ImportError as e:
        raise DatasetError(f"Pillow required for tinyimagenet: {e}") from None

    base = Path(root) / "tiny-imagenet-200"
    if not base.exists():
        url = "http://cs231n.stanford.edu/tiny-imagenet-200.zip"
        archive = Path(root) / "tiny-imagenet-200.zip"
        archive.parent.mkdir(parents=True, exist_ok=True)
        try:
            urllib.request.urlretrieve(url, archive)
            with zipfile.ZipFile(archive) as z:
                z.extractall(root)
        except Exception as e:
            raise DatasetError(f"could not obtain tinyimagenet: {e}") from None

    wnids = sorted((base / "wnids.txt").read_text().split())
    index = {w: i for i, w in enumerate(wnids)}
    train_images, train_labels = [], []
    for wnid in wnids:
        for img_path in sorted((base / "train" / wnid / "images").iterdir()):
            train_images.append(Image.open(img_path).convert("RGB"))
            train_labels.append(index[wnid])
    test_images, test_labels = [], []
    for line in (base / "val" / "val_annotations.txt").read_text().splitlines():
        fname, wnid = line.split("\t")[:2]
        test_images.append(
            Image.open(base / "val" / "images" / fname).convert("RGB"))
        test_labels.append(index[wnid])
    return DatasetSplits(
        name="tinyimagenet",
        class_names=tuple(wnids),
        train_images=train_images,
        train_labels=train_labels,
        test_images=test_images,
        test_labels=test_labels,
    )


register_dataset("cifar10", lambda root: _load_cifar("cifar10", root))
register_dataset("cifar100", lambda root: _load_cifar("cifar100", root))
register_dataset("tinyimagenet", _load_tinyimagenet)
