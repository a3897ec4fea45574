"""Bounding-volume hierarchy over triangles: closest-point and sign queries."""

import numpy as np

from .. import kernels
from ..errors import NonWatertightMesh, SignUndecidable
from .mesh import TriangleMesh

LEAF_SIZE = 4

# Retry directions for grazing ray casts: +x first, then fixed skew unit
# vectors chosen away from any mesh-aligned plane.
_RAY_DIRECTIONS = np.array([
    [1.0, 0.0, 0.0],
    [0.577350269189626, 0.577350269189626, 0.577350269189626],
    [0.824621125123532, 0.412310562561766, -0.387500863461409],
    [-0.267261241912424, 0.801783725737273, 0.534522483824849],
    [0.154303349962092, -0.617213399848368, 0.771516749810460],
    [-0.683486126173409, 0.569571771811174, -0.455657417448939],
    [0.442325868139322, 0.884651736278643, 0.147441956046440],
    [-0.502570711032479, -0.301542426619487, 0.810272771413121],
    [0.688247201611685, -0.229415733870562, 0.688247201611685],
], dtype=np.float64)

MAX_SIGN_RETRIES = len(_RAY_DIRECTIONS) - 1


class Bvh:
    """Axis-aligned box tree over a validated triangle mesh.

    Flattened node arrays: internal nodes carry child indices, leaves carry
    a [start, start+count) window into ``order`` (triangle ids, ascending
    within each leaf so first-hit argmin favors the lowest index).
    """

    def __init__(self, mesh: TriangleMesh):
        mesh.validate()
        self.mesh = mesh
        self.v0, self.v1, self.v2 = mesh.corners()
        lo = np.minimum(np.minimum(self.v0, self.v1), self.v2)
        hi = np.maximum(np.maximum(self.v0, self.v1), self.v2)
        cent = (self.v0 + self.v1 + self.v2) / 3.0

        nlo, nhi, nleft, nright, nstart, ncount = [], [], [], [], [], []
        order = []

        def build(ids):
            node = len(nlo)
            nlo.append(lo[ids].min(axis=0))
            nhi.append(hi[ids].max(axis=0))
            nleft.append(-1)
            nright.append(-1)
            nstart.append(-1)
            ncount.append(0)
            if len(ids) <= LEAF_SIZE:
                nstart[node] = len(order)
                ncount[node] = len(ids)
                order.extend(sorted(ids.tolist()))
                return node
            axis = int(np.argmax(nhi[node] - nlo[node]))
            mid = len(ids) // 2
            part = ids[np.argsort(cent[ids, axis], kind="stable")]
            nleft[node] = build(part[:mid])
            nright[node] = build(part[mid:])
            return node

        import sys
        depth_need = 2 * int(np.ceil(np.log2(max(2, len(self.v0))))) + 50
        if sys.getrecursionlimit() < depth_need + 100:
            sys.setrecursionlimit(depth_need + 100)
        build(np.arange(len(self.v0)))

        self.nlo = np.ascontiguousarray(nlo)
        self.nhi = np.ascontiguousarray(nhi)
        self.nleft = np.ascontiguousarray(nleft, dtype=np.int64)
        self.nright = np.ascontiguousarray(nright, dtype=np.int64)
        self.nstart = np.ascontiguousarray(nstart, dtype=np.int64)
        self.ncount = np.ascontiguousarray(ncount, dtype=np.int64)
        self.order = np.ascontiguousarray(order, dtype=np.int64)

    def _node_args(self):
        return (self.nlo, self.nhi, self.nleft, self.nright,
                self.nstart, self.ncount, self.order)


def build_bvh(mesh: TriangleMesh) -> Bvh:
    return Bvh(mesh)


def closest_surface_points(bvh: Bvh, q):
    """Batch closest-point query. Returns (dist (n,), points (n,3), tri (n,))."""
    q = np.ascontiguousarray(np.atleast_2d(q), dtype=np.float64)
    return kernels.bvh_closest_point(q, *bvh._node_args(),
                                     bvh.v0, bvh.v1, bvh.v2)


def closest_surface_point(bvh: Bvh, q):
    """Distance to the mesh and the realizing surface point (ties -> lowest
    triangle index)."""
    dist, pts, _ = closest_surface_points(bvh, np.asarray(q, dtype=float))
    return float(dist[0]), pts[0]


def brute_force_closest(mesh: TriangleMesh, q):
    """Exhaustive oracle-side query over all triangles."""
    q = np.ascontiguousarray(np.atleast_2d(q), dtype=np.float64)
    v0, v1, v2 = mesh.corners()
    return kernels.closest_point_brute(q, v0, v1, v2)


def point_signs(mesh: TriangleMesh, bvh: Bvh, q, check_watertight=True):
    """Inside/outside classification for a batch of points.

    Ray-crossing parity along +x; queries whose ray grazes an edge, vertex
    or coplanar face are retried with fixed perturbed directions. Returns
    int8 array of -1 (inside) / +1 (outside).
    """
    if check_watertight and not mesh.is_watertight():
        raise NonWatertightMesh("sign queries require a watertight mesh")
    q = np.ascontiguousarray(np.atleast_2d(q), dtype=np.float64)
    signs = np.zeros(len(q), dtype=np.int8)
    pending = np.arange(len(q))
    for d in _RAY_DIRECTIONS:
        count, graze = kernels.ray_crossings(
            np.ascontiguousarray(q[pending]), d, *bvh._node_args(),
            bvh.v0, bvh.v1, bvh.v2)
        ok = ~graze
        done = pending[ok]
        signs[done] = np.where(count[ok] % 2 == 1, -1, 1).astype(np.int8)
        pending = pending[graze]
        if pending.size == 0:
            return signs
    raise SignUndecidable(
        f"{pending.size} point(s) still grazing after "
        f"{MAX_SIGN_RETRIES} retries; first: {q[pending[0]]}")


def point_sign(mesh: TriangleMesh, bvh: Bvh, q) -> int:
    """-1 iff q lies inside the watertight solid, else +1."""
    return int(point_signs(mesh, bvh, np.asarray(q, dtype=float))[0])
