"""Binary field snapshot format.

Layout (all little-endian):

    header  magic "GSW1" (4 bytes), version u32, N u32, L f64, n u32, alpha f64
    links   N^3 * 3 f64, site-major with the axis index minor
            (C order over (x1, x2, x3, axis))
    psi     N^3 * n * 4 f64, C order over (x1, x2, x3, component, coefficient)
    B       N^3 * 3 * n^2 complex128 per link (re/im interleaved f64),
            C order over (x1, x2, x3, axis, row, column)

Reading validates the magic, version and exact payload length.  Background
link matrices are kept bit-for-bit when they are special unitary within
1e-12 and re-unitarized (polar projection, determinant rephased) otherwise,
so a write/read round trip of valid data reproduces every array exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lattice import LatticeGeometry

MAGIC = b"GSW1"
VERSION = 1
_HEADER = struct.Struct("<4sIIdId")

__all__ = ["Snapshot", "SnapshotError", "write_snapshot", "read_snapshot"]


class SnapshotError(Exception):
    pass


@dataclass
class Snapshot:
    geom: LatticeGeometry
    n: int
    alpha: float
    links: np.ndarray
    psi: np.ndarray
    background: np.ndarray


def write_snapshot(path, geom: LatticeGeometry, n: int, alpha: float, links, psi, background):
    links = np.ascontiguousarray(links, dtype="<f8")
    psi = np.ascontiguousarray(psi, dtype="<f8")
    background = np.ascontiguousarray(background, dtype="<c16")
    if links.shape != geom.shape + (3,):
        raise SnapshotError(f"links shape {links.shape} does not match geometry")
    if psi.shape != geom.shape + (n, 4):
        raise SnapshotError(f"spinor shape {psi.shape} does not match geometry")
    if background.shape != geom.shape + (3, n, n):
        raise SnapshotError(f"background shape {background.shape} does not match geometry")
    header = _HEADER.pack(MAGIC, VERSION, geom.N, geom.L, n, float(alpha))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(links.tobytes())
        fh.write(psi.tobytes())
        fh.write(background.tobytes())


def _reunitarize(background: np.ndarray, n: int) -> np.ndarray:
    u, _, vh = np.linalg.svd(background)
    proj = u @ vh
    det = np.linalg.det(proj)
    return proj * np.exp(-1j * np.angle(det) / n)[..., None, None]


def read_snapshot(path) -> Snapshot:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotError("snapshot truncated: header incomplete")
    magic, version, n_sites, length, n, alpha = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r} (expected {MAGIC!r})")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    if n_sites < 4 or n < 1 or not length > 0.0:
        raise SnapshotError("snapshot header holds invalid geometry")
    geom = LatticeGeometry(int(n_sites), float(length))
    n_lattice = n_sites**3
    sizes = (n_lattice * 3 * 8, n_lattice * n * 4 * 8, n_lattice * 3 * n * n * 16)
    if len(data) != _HEADER.size + sum(sizes):
        raise SnapshotError(
            f"snapshot payload has {len(data) - _HEADER.size} bytes,"
            f" expected {sum(sizes)}"
        )
    off = _HEADER.size
    links = np.frombuffer(data, dtype="<f8", count=n_lattice * 3, offset=off)
    links = links.reshape(geom.shape + (3,)).copy()
    off += sizes[0]
    psi = np.frombuffer(data, dtype="<f8", count=n_lattice * n * 4, offset=off)
    psi = psi.reshape(geom.shape + (n, 4)).copy()
    off += sizes[1]
    background = np.frombuffer(data, dtype="<c16", count=n_lattice * 3 * n * n, offset=off)
    background = background.reshape(geom.shape + (3, n, n)).copy()

    eye = np.eye(n)
    gram_dev = np.abs(np.conj(np.swapaxes(background, -1, -2)) @ background - eye).max()
    det_dev = np.abs(np.linalg.det(background) - 1.0).max()
    if max(gram_dev, det_dev) > 1e-12:
        background = _reunitarize(background, n)
    return Snapshot(geom, int(n), float(alpha), links, psi, background)
