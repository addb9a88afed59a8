"""Extraction pipeline tests using injected offline substitutes, plus a
network-dependent integration test that is skipped when the real stack
or its downloads are unavailable."""

import numpy as np
import pytest

from realcl.embedstore import load_store
from realcl.runner import RunConfig, run_single
from realcl.scenario import StreamKind

from extractor import (
    ExtractError,
    ExtractSpec,
    extract,
    register_dataset,
    register_encoder,
    sanity_report,
)
from extractor.datasets import DatasetError, DatasetSplits, get_dataset

from fakes import FakeEncoder, make_fake_dataset


def test_extract_writes_readable_store(tmp_path, fake_dataset, fake_encoder):
    out = tmp_path / "fake.cleb"
    spec = ExtractSpec(dataset="fake", out=str(out), encoder="fake")
    store = extract(spec, dataset=fake_dataset, encoder=fake_encoder)
    reread = load_store(out)
    assert reread == store
    assert reread.dim == fake_encoder.dim
    assert reread.class_names == fake_dataset.class_names


def test_split_counts_and_order(tmp_path, fake_dataset, fake_encoder):
    out = tmp_path / "fake.cleb"
    store = extract(ExtractSpec(dataset="fake", out=str(out), encoder="fake"),
                    dataset=fake_dataset, encoder=fake_encoder)
    n_train = len(fake_dataset.train_images)
    assert int((store.splits == 0).sum()) == n_train
    assert int((store.splits == 1).sum()) == len(fake_dataset.test_images)
    # train block first, sequential ids within each split
    assert list(store.sample_ids) == list(range(len(store)))
    assert all(store.splits[:n_train] == 0) and all(store.splits[n_train:] == 1)
    assert list(store.labels[:n_train]) == list(fake_dataset.train_labels)
    assert list(store.labels[n_train:]) == list(fake_dataset.test_labels)


def test_embeddings_match_direct_encoding(tmp_path, fake_dataset, fake_encoder):
    out = tmp_path / "fake.cleb"
    store = extract(ExtractSpec(dataset="fake", out=str(out), encoder="fake",
                                batch_size=4),
                    dataset=fake_dataset, encoder=fake_encoder)
    direct = fake_encoder.encode(fake_dataset.train_images)
    n = len(direct)
    assert store.vectors[:n].tobytes() == direct.tobytes()


def test_output_is_byte_deterministic(tmp_path, fake_dataset, fake_encoder):
    a, b = tmp_path / "a.cleb", tmp_path / "b.cleb"
    extract(ExtractSpec(dataset="fake", out=str(a), encoder="fake"),
            dataset=fake_dataset, encoder=fake_encoder)
    extract(ExtractSpec(dataset="fake", out=str(b), encoder="fake"),
            dataset=fake_dataset, encoder=fake_encoder)
    assert a.read_bytes() == b.read_bytes()


def test_batch_size_does_not_change_output(tmp_path, fake_dataset, fake_encoder):
    a, b = tmp_path / "a.cleb", tmp_path / "b.cleb"
    extract(ExtractSpec(dataset="fake", out=str(a), encoder="fake", batch_size=1),
            dataset=fake_dataset, encoder=fake_encoder)
    extract(ExtractSpec(dataset="fake", out=str(b), encoder="fake", batch_size=100),
            dataset=fake_dataset, encoder=fake_encoder)
    assert a.read_bytes() == b.read_bytes()


def test_known_width_mismatch_rejected(tmp_path, fake_dataset):
    wrong = FakeEncoder(dim=8, name="vitb32")  # vitb32 must be 512-d
    with pytest.raises(ExtractError, match="expected 512"):
        extract(ExtractSpec(dataset="fake", out=str(tmp_path / "x.cleb"),
                            encoder="vitb32"),
                dataset=fake_dataset, encoder=wrong)


def test_bad_encoder_shape_rejected(tmp_path, fake_dataset, fake_encoder):
    class Lying:
        name = "fake"
        dim = fake_encoder.dim + 1
        encode = fake_encoder.encode

    with pytest.raises(ExtractError, match="shape"):
        extract(ExtractSpec(dataset="fake", out=str(tmp_path / "x.cleb"),
                            encoder="fake"),
                dataset=fake_dataset, encoder=Lying())


def test_dataset_invariants_enforced():
    with pytest.raises(DatasetError):
        DatasetSplits(name="x", class_names=("a",), train_images=[1],
                      train_labels=[0, 0], test_images=[], test_labels=[])
    with pytest.raises(DatasetError):
        DatasetSplits(name="x", class_names=("a",), train_images=[1],
                      train_labels=[1], test_images=[], test_labels=[])


def test_unknown_dataset_and_registry_hook(tmp_path, fake_dataset, fake_encoder):
    with pytest.raises(DatasetError, match="unknown dataset"):
        get_dataset("nope")
    register_dataset("registered-fake", lambda root: fake_dataset)
    register_encoder("registered-fake", lambda: fake_encoder)
    store = extract(ExtractSpec(dataset="registered-fake",
                                out=str(tmp_path / "r.cleb"),
                                encoder="registered-fake"))
    assert len(store) == len(fake_dataset.train_images) + len(fake_dataset.test_images)


# ------------------------------------------------------------- reports


def test_sanity_report_separable(tmp_path, fake_encoder):
    dataset = make_fake_dataset(per_train=10, per_test=4, separation=20.0)
    out = tmp_path / "sep.cleb"
    extract(ExtractSpec(dataset="fake", out=str(out), encoder="fake"),
            dataset=dataset, encoder=fake_encoder)
    report = sanity_report(out)
    assert "-> OK" in report
    assert "WARNING" not in report
    line = [l for l in report.splitlines() if "cosine similarity" in l][0]
    same = float(line.split("same-class")[1].split(",")[0])
    cross = float(line.split("cross-class")[1].split("->")[0])
    assert same > cross + 0.1  # wide margin on a separable store


def test_sanity_report_flags_missing_class(tmp_path, fake_encoder):
    dataset = make_fake_dataset()
    # drop class 2 from the test split
    keep = [i for i, l in enumerate(dataset.test_labels) if l != 2]
    gutted = DatasetSplits(
        name="fake", class_names=dataset.class_names,
        train_images=dataset.train_images, train_labels=dataset.train_labels,
        test_images=[dataset.test_images[i] for i in keep],
        test_labels=[dataset.test_labels[i] for i in keep],
    )
    out = tmp_path / "gutted.cleb"
    extract(ExtractSpec(dataset="fake", out=str(out), encoder="fake"),
            dataset=gutted, encoder=fake_encoder)
    report = sanity_report(out)
    assert "MISSING" in report and "WARNING" in report
    assert "class_2" in [l for l in report.splitlines() if "MISSING" in l][0]


# ------------------------------------------------- primary-side contract


def test_extracted_store_runs_through_primary(tmp_path, fake_encoder):
    """The whole point: an extracted file drops straight into the
    benchmark runner through the public store interface."""
    dataset = make_fake_dataset(per_train=30, per_test=10, separation=20.0)
    out = tmp_path / "bench.cleb"
    extract(ExtractSpec(dataset="fake", out=str(out), encoder="fake"),
            dataset=dataset, encoder=fake_encoder)
    cfg = RunConfig(store_path=str(out), scenario=StreamKind.REAL,
                    num_tasks=2, memory_capacity=30, seeds=(1,))
    record = run_single(cfg, load_store(out), seed=1)
    assert len(record["accuracy_matrix"]) == 2


# --------------------------------------------------------- integration


@pytest.mark.integration
def test_cifar10_real_extraction(tmp_path):
    """Full CIFAR-10 extraction with the real CLIP tower. Needs network
    access for the dataset and the encoder weights; skipped otherwise."""
    try:
        from extractor.encoders import get_encoder
        encoder = get_encoder("vitb32")
        dataset = get_dataset("cifar10", str(tmp_path / "raw"))
    except Exception as e:
        pytest.skip(f"real stack unavailable: {e}")
    out = tmp_path / "cifar10.cleb"
    store = extract(ExtractSpec(dataset="cifar10", out=str(out)),
                    dataset=dataset, encoder=encoder)
    assert store.dim == 512
    assert int((store.splits == 0).sum()) == 50_000
    assert int((store.splits == 1).sum()) == 10_000
    assert store.num_classes == 10
    assert "-> OK" in sanity_report(out)
