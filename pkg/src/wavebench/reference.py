"""Fine-grid reference solutions and their binary cache format.

The reference is a Crank-Nicolson P1 run on a fine structured grid, stored
as full nodal slices (boundary rows exactly zero). Cache files use the
"WBEN" format: magic, u32 version, u32 {nx, ny, Nt}, f64 {L1, L2, c, T, dt},
the value array time-major then y-major then x, and a trailing 64-bit
FNV-1a checksum of all preceding bytes. Generation streams slice by slice,
so the peak memory stays at one spatial slice; loading memory-maps.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from .fem import FemSystem, cn_steps, interior_values
from .mesh import build_structured_mesh
from .problem import WaveProblem

__all__ = [
    "ReferenceSolution",
    "CacheError",
    "generate_reference",
    "write_reference",
    "load_reference",
    "fnv1a64",
]

MAGIC = b"WBEN"
VERSION = 1
_HEADER = struct.Struct("<4sIIII5d")       # magic, ver, nx, ny, Nt, 5 doubles

_FNV_OFFSET = np.uint64(14695981039346656037)
_FNV_PRIME = np.uint64(1099511628211)

try:
    from numba import njit

    @njit(cache=True)
    def _fnv1a_update(h, buf):
        for i in range(buf.size):
            h = (h ^ np.uint64(buf[i])) * _FNV_PRIME
        return h
except ImportError:     # pragma: no cover - numba is a declared dependency
    def _fnv1a_update(h, buf):
        p = int(_FNV_PRIME)
        h = int(h)
        for b in buf.tobytes():
            h = ((h ^ b) * p) & 0xFFFFFFFFFFFFFFFF
        return np.uint64(h)


def fnv1a64(data: bytes, h=_FNV_OFFSET) -> np.uint64:
    """64-bit FNV-1a hash; `h` allows incremental chaining."""
    # the jitted update hands back a plain int, which the next dispatch
    # would reject for values above 2^63 - 1; keep the state a uint64
    h = np.uint64(int(h) & 0xFFFFFFFFFFFFFFFF)
    return _fnv1a_update(h, np.frombuffer(data, dtype=np.uint8))


class CacheError(RuntimeError):
    """Reference cache file is corrupt or does not match its checksum."""


@dataclass
class ReferenceSolution:
    """Nodal reference values (Nt_ref+1, ny+1, nx+1) with problem metadata."""

    problem: WaveProblem
    grid_nx: int
    grid_ny: int
    dt_ref: float
    Nt_ref: int
    values: np.ndarray          # possibly a read-only memmap

    def at_time(self, t: float) -> np.ndarray:
        """Nodal slice at time t by linear interpolation between levels."""
        T = self.problem.T
        if t < -1e-12 or t > T * (1 + 1e-12):
            raise ValueError(f"time {t} outside [0, {T}]")
        s = min(max(t / self.dt_ref, 0.0), float(self.Nt_ref))
        k = min(int(s), self.Nt_ref - 1)
        theta = s - k
        if theta == 0.0:
            return np.asarray(self.values[k])
        return (1.0 - theta) * np.asarray(self.values[k]) \
            + theta * np.asarray(self.values[k + 1])


def _header_bytes(ref_nx, ref_ny, Nt_ref, problem, dt_ref) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, ref_nx, ref_ny, Nt_ref,
                        problem.L1, problem.L2, problem.c, problem.T, dt_ref)


def write_reference(ref: ReferenceSolution, path) -> None:
    """Write a complete reference in the WBEN format (atomic)."""
    path = Path(path)

    def slices():
        for k in range(ref.Nt_ref + 1):
            yield np.ascontiguousarray(ref.values[k], dtype="<f8")

    _stream_write(path, ref.grid_nx, ref.grid_ny, ref.Nt_ref,
                  ref.problem, ref.dt_ref, slices())


def _stream_write(path: Path, ref_nx, ref_ny, Nt_ref, problem, dt_ref, slices):
    header = _header_bytes(ref_nx, ref_ny, Nt_ref, problem, dt_ref)
    tmp = path.with_name(path.name + ".tmp")
    h = fnv1a64(header)
    with open(tmp, "wb") as f:
        f.write(header)
        for sl in slices:
            data = np.ascontiguousarray(sl, dtype="<f8").tobytes()
            h = fnv1a64(data, h)
            f.write(data)
        f.write(struct.pack("<Q", int(h)))
    os.replace(tmp, path)


def load_reference(path, problem: WaveProblem) -> ReferenceSolution:
    """Memory-map a WBEN file, verifying magic, version and checksum."""
    path = Path(path)
    raw = np.memmap(path, dtype=np.uint8, mode="r")
    if raw.size < _HEADER.size + 8:
        raise CacheError(f"{path}: truncated cache file")
    magic, ver, nx, ny, Nt, L1, L2, c, T, dt = _HEADER.unpack(
        bytes(raw[:_HEADER.size]))
    if magic != MAGIC:
        raise CacheError(f"{path}: bad magic {magic!r}")
    if ver != VERSION:
        raise CacheError(f"{path}: unsupported format version {ver}")
    n_vals = (Nt + 1) * (ny + 1) * (nx + 1)
    expect = _HEADER.size + 8 * n_vals + 8
    if raw.size != expect:
        raise CacheError(f"{path}: size {raw.size}, expected {expect}")
    h = _FNV_OFFSET
    body_end = raw.size - 8
    for start in range(0, body_end, 1 << 24):
        chunk = raw[start:min(start + (1 << 24), body_end)]
        h = _fnv1a_update(np.uint64(int(h) & 0xFFFFFFFFFFFFFFFF), chunk)
    (stored,) = struct.unpack("<Q", bytes(raw[body_end:]))
    if int(h) != stored:
        raise CacheError(f"{path}: checksum mismatch")
    for name, a, b in (("L1", L1, problem.L1), ("L2", L2, problem.L2),
                       ("c", c, problem.c), ("T", T, problem.T)):
        if a != b:
            raise CacheError(f"{path}: stored {name}={a} differs from "
                             f"requested {b}")
    values = np.memmap(path, dtype="<f8", mode="r", offset=_HEADER.size,
                       shape=(Nt + 1, ny + 1, nx + 1))
    return ReferenceSolution(problem, nx, ny, dt, Nt, values)


def cache_filename(problem: WaveProblem, ref_nx: int, ref_ny: int,
                   Nt_ref: int) -> str:
    """Deterministic cache name from the full problem fingerprint."""
    fp = json.dumps({"ic": problem.ic, "params": problem.ic_params,
                     "L1": problem.L1, "L2": problem.L2, "c": problem.c,
                     "T": problem.T}, sort_keys=True)
    tag = hashlib.sha1(fp.encode()).hexdigest()[:10]
    return f"ref_{problem.ic}_{ref_nx}x{ref_ny}_nt{Nt_ref}_{tag}.wben"


def generate_reference(problem: WaveProblem, ref_nx: int, ref_ny: int,
                       dt_ref: float, cache_dir=None) -> ReferenceSolution:
    """Run the fine-grid solver, caching the result on disk.

    With `cache_dir` set, an existing valid cache file is loaded instead of
    recomputing; corrupt files are regenerated. The solve streams each time
    level straight to disk.
    """
    if dt_ref <= 0:
        raise ValueError("reference time step must be positive")
    Nt_ref = int(round(problem.T / dt_ref))
    if abs(Nt_ref * dt_ref - problem.T) > 1e-9 * problem.T or Nt_ref < 1:
        raise ValueError("dt_ref must divide the horizon evenly")

    path = None
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        path = cache_dir / cache_filename(problem, ref_nx, ref_ny, Nt_ref)
        if path.exists():
            try:
                return load_reference(path, problem)
            except CacheError:
                path.unlink()

    mesh = build_structured_mesh(problem.L1, problem.L2, ref_nx, ref_ny)
    sys = FemSystem.build(mesh, problem.c)
    u0 = interior_values(problem.initial_condition(), mesh)
    ids = mesh.interior_ids

    def slices():
        shape = (ref_ny + 1, ref_nx + 1)
        steps = cn_steps(sys, u0, dt_ref)
        for _ in range(Nt_ref + 1):
            grid = np.zeros(shape)
            grid.ravel()[ids] = next(steps)
            yield grid
        steps.close()

    if path is None:
        values = np.empty((Nt_ref + 1, ref_ny + 1, ref_nx + 1))
        for k, sl in enumerate(slices()):
            values[k] = sl
        return ReferenceSolution(problem, ref_nx, ref_ny, dt_ref, Nt_ref, values)

    _stream_write(path, ref_nx, ref_ny, Nt_ref, problem, dt_ref, slices())
    return load_reference(path, problem)
