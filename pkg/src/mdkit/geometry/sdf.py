"""Signed-distance volumes: voxelization, interpolated queries, cropping, I/O.

A volume stores signed distances (negative inside the solid) at voxel
centers ``origin + (i + 0.5) * voxel_size`` of an N per-axis grid.
Queries interpolate trilinearly; out-of-grid points clamp to the boundary
cell so downstream losses stay finite for wandering poses.
"""

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import CropOutsideVolume, FormatError, GridTooSmall, NonWatertightMesh
from .bvh import Bvh, closest_surface_points, point_signs
from .mesh import TriangleMesh

MDSF_MAGIC = b"MDSF"
MDSF_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    """Grid placement: origin is the lower corner of the covered box."""
    origin: tuple
    voxel_size: float
    resolution: int

    def __post_init__(self):
        object.__setattr__(self, "origin",
                           tuple(float(x) for x in self.origin))
        if self.voxel_size <= 0:
            raise GridTooSmall(f"voxel_size must be > 0, got {self.voxel_size}")
        if self.resolution < 2:
            raise GridTooSmall(f"resolution must be >= 2, got {self.resolution}")

    @property
    def extent(self) -> float:
        return self.voxel_size * self.resolution

    def centers(self):
        """All voxel centers, shape (N^3, 3), x index varying fastest."""
        n = self.resolution
        ax = [np.asarray(self.origin)[k] + (np.arange(n) + 0.5) * self.voxel_size
              for k in range(3)]
        gx, gy, gz = np.meshgrid(ax[0], ax[1], ax[2], indexing="ij")
        return np.stack([gx.ravel(order="F"), gy.ravel(order="F"),
                         gz.ravel(order="F")], axis=1)


class SdfVolume:
    """Signed distances sampled at the voxel centers of a GridSpec."""

    def __init__(self, spec: GridSpec, values):
        values = np.ascontiguousarray(values, dtype=np.float64)
        n = spec.resolution
        if values.shape != (n, n, n):
            raise FormatError(f"values shape {values.shape} != {(n, n, n)}")
        self.spec = spec
        self.values = values

    @property
    def origin(self):
        return np.asarray(self.spec.origin)


def voxelize_sdf(mesh: TriangleMesh, spec: GridSpec, bvh: Bvh = None) -> SdfVolume:
    """Exact signed distance at every voxel center.

    Magnitude from the closest surface point, sign from ray-crossing
    parity; requires a watertight mesh.
    """
    if not mesh.is_watertight():
        raise NonWatertightMesh("voxelization requires a watertight mesh")
    lo, hi = mesh.bounds
    box_lo = np.asarray(spec.origin)
    box_hi = box_lo + spec.extent
    if np.any(hi < box_lo - spec.extent) or np.any(lo > box_hi + spec.extent):
        warnings.warn("voxelization grid is far from the mesh bounds",
                      stacklevel=2)
    if bvh is None:
        bvh = Bvh(mesh)
    centers = spec.centers()
    dist, _, _ = closest_surface_points(bvh, centers)
    signs = point_signs(mesh, bvh, centers, check_watertight=False)
    n = spec.resolution
    values = (signs * dist).reshape((n, n, n), order="F")
    return SdfVolume(spec, values)


def sample_sdf(volume: SdfVolume, q):
    """Trilinearly interpolated signed distance at q ((3,) or (n, 3))."""
    qa = np.ascontiguousarray(np.atleast_2d(np.asarray(q, dtype=np.float64)))
    vals = kernels.trilinear_sample(volume.values, volume.origin,
                                    volume.spec.voxel_size, qa)
    return float(vals[0]) if np.asarray(q).ndim == 1 else vals


def sample_sdf_gradient(volume: SdfVolume, q):
    """Spatial gradient of the interpolant at q (zero along clamped axes)."""
    single = np.asarray(q).ndim == 1
    qa = np.ascontiguousarray(np.atleast_2d(np.asarray(q, dtype=np.float64)))
    _, grads = kernels.trilinear_sample(volume.values, volume.origin,
                                        volume.spec.voxel_size, qa,
                                        with_grad=True)
    return grads[0] if single else grads


def sample_sdf_with_gradient(volume: SdfVolume, q):
    """(values, gradients) in one pass; q must be (n, 3)."""
    qa = np.ascontiguousarray(np.asarray(q, dtype=np.float64))
    return kernels.trilinear_sample(volume.values, volume.origin,
                                    volume.spec.voxel_size, qa, with_grad=True)


def crop_scene(volume: SdfVolume, center, radius: float) -> SdfVolume:
    """Sub-volume covering the box center +- radius.

    The crop snaps to the source lattice so copied values (and therefore
    interpolated world-space queries over the interior) are preserved
    exactly; cells requested beyond the source extent clamp to the nearest
    boundary cell.
    """
    if radius <= 0:
        raise CropOutsideVolume(f"radius must be > 0, got {radius}")
    center = np.asarray(center, dtype=float)
    h = volume.spec.voxel_size
    n = volume.spec.resolution
    src_lo = volume.origin
    box_lo = center - radius
    box_hi = center + radius
    if np.any(box_hi < src_lo) or np.any(box_lo > src_lo + volume.spec.extent):
        raise CropOutsideVolume("crop box does not overlap the volume")

    i0 = np.floor((box_lo - src_lo) / h + 1e-12).astype(np.int64)
    i1 = np.ceil((box_hi - src_lo) / h - 1e-12).astype(np.int64)
    m = int((i1 - i0).max())
    i1 = i0 + m  # cubical result
    idx = [np.clip(np.arange(i0[k], i1[k]), 0, n - 1) for k in range(3)]
    values = volume.values[np.ix_(idx[0], idx[1], idx[2])]
    new_origin = src_lo + i0 * h
    return SdfVolume(GridSpec(tuple(new_origin), h, m), values)


def save_mdsf(volume: SdfVolume, path):
    """Binary volume format: magic MDSF, u32 version, f64 origin[3],
    f64 voxel_size, u32 resolution, f32 values in x-fastest order."""
    with open(path, "wb") as fh:
        fh.write(MDSF_MAGIC)
        fh.write(struct.pack("<I", MDSF_VERSION))
        fh.write(struct.pack("<3d", *volume.spec.origin))
        fh.write(struct.pack("<d", volume.spec.voxel_size))
        fh.write(struct.pack("<I", volume.spec.resolution))
        fh.write(volume.values.astype("<f4").ravel(order="F").tobytes())


def load_mdsf(path) -> SdfVolume:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MDSF_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        version, = struct.unpack("<I", fh.read(4))
        if version != MDSF_VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        origin = struct.unpack("<3d", fh.read(24))
        voxel, = struct.unpack("<d", fh.read(8))
        res, = struct.unpack("<I", fh.read(4))
        data = np.frombuffer(fh.read(4 * res ** 3), dtype="<f4")
        if data.size != res ** 3:
            raise FormatError(f"{path}: truncated value block")
    values = data.astype(np.float64).reshape((res, res, res), order="F")
    return SdfVolume(GridSpec(origin, voxel, res), values)
