import numpy as np
import pytest

from gswlab.lattice import LatticeGeometry
from gswlab.snapshot import SnapshotError, read_snapshot, write_snapshot

from conftest import make_random_instance


def write_random(tmp_path, geom, n, rng, alpha=0.4):
    links, psi, background = make_random_instance(geom, n, rng)
    path = tmp_path / "state.gsw"
    write_snapshot(path, geom, n, alpha, links, psi, background)
    return path, links, psi, background


def test_roundtrip_bit_exact(tmp_path, geom4, rng):
    path, links, psi, background = write_random(tmp_path, geom4, 2, rng)
    snap = read_snapshot(path)
    assert snap.geom == geom4
    assert snap.n == 2
    assert snap.alpha == 0.4
    assert np.array_equal(snap.links, links)
    assert np.array_equal(snap.psi, psi)
    assert np.array_equal(snap.background, background)


def test_roundtrip_various_sizes(tmp_path, rng):
    for n_sites, n in ((4, 1), (5, 3)):
        geom = LatticeGeometry(n_sites, 2.5)
        path, links, psi, background = write_random(tmp_path, geom, n, rng)
        snap = read_snapshot(path)
        assert np.array_equal(snap.links, links)
        assert np.array_equal(snap.psi, psi)
        assert np.array_equal(snap.background, background)


def test_truncated_rejected(tmp_path, geom4, rng):
    path, *_ = write_random(tmp_path, geom4, 2, rng)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(SnapshotError, match="bytes"):
        read_snapshot(path)
    path.write_bytes(data[:10])
    with pytest.raises(SnapshotError, match="truncated"):
        read_snapshot(path)


def test_bad_magic_and_version_rejected(tmp_path, geom4, rng):
    path, *_ = write_random(tmp_path, geom4, 2, rng)
    data = bytearray(path.read_bytes())
    bad = tmp_path / "bad.gsw"
    bad.write_bytes(b"XXXX" + bytes(data[4:]))
    with pytest.raises(SnapshotError, match="magic"):
        read_snapshot(bad)
    corrupt = bytearray(data)
    corrupt[4] = 99  # version byte
    bad.write_bytes(bytes(corrupt))
    with pytest.raises(SnapshotError, match="version"):
        read_snapshot(bad)


def test_background_reunitarized_beyond_tolerance(tmp_path, geom4, rng):
    links, psi, background = make_random_instance(geom4, 2, rng)
    skewed = background * (1.0 + 1e-6)
    path = tmp_path / "skewed.gsw"
    write_snapshot(path, geom4, 2, 0.0, links, psi, skewed)
    snap = read_snapshot(path)
    eye = np.eye(2)
    gram = np.conj(np.swapaxes(snap.background, -1, -2)) @ snap.background
    assert np.abs(gram - eye).max() < 1e-12
    assert np.abs(np.linalg.det(snap.background) - 1.0).max() < 1e-12
    # within tolerance the stored bits are preserved
    path2 = tmp_path / "clean.gsw"
    write_snapshot(path2, geom4, 2, 0.0, links, psi, background)
    assert np.array_equal(read_snapshot(path2).background, background)


def test_shape_mismatch_rejected(tmp_path, geom4, rng):
    links, psi, background = make_random_instance(geom4, 2, rng)
    with pytest.raises(SnapshotError, match="shape"):
        write_snapshot(tmp_path / "x.gsw", geom4, 3, 0.0, links, psi, background)
