"""Pure-numpy kernels: the fallback backend.

Implements exactly the same contracts as the compiled core in
``_fastcore.pyx`` (same closest-point formula, same tie-breaking, same
grazing-detection thresholds) so the two backends are interchangeable.
Vectorized over queries / triangles; slower than the compiled core on
tree-heavy workloads but dependency-free.
"""

import numpy as np

# Shared robustness thresholds (must mirror _fastcore.pyx).
BARY_EPS = 1e-9          # barycentric proximity to an edge/vertex => grazing
T_EPS = 1e-12            # ray-parameter cutoff for "starts on surface"
T_GRAZE = 1e-9           # forward hits closer than this flag a retry
PARALLEL_EPS = 1e-9      # |det| below this fraction of triangle scale => parallel


def _dot(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def closest_point_triangles(p, a, b, c):
    """Closest points on triangles (a, b, c) to points p, broadcast together.

    Returns (dist_sq, closest_point). Uses the standard seven-region
    classification; region priority matches the scalar implementation.
    """
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = _dot(ab, ap)
    d2 = _dot(ac, ap)
    bp = p - b
    d3 = _dot(ab, bp)
    d4 = _dot(ac, bp)
    cp = p - c
    d5 = _dot(ab, cp)
    d6 = _dot(ac, cp)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    with np.errstate(divide="ignore", invalid="ignore"):
        # interior (lowest priority), then overwrite in reverse priority order
        denom = va + vb + vc
        v = np.where(denom != 0.0, vb / denom, 0.0)
        w = np.where(denom != 0.0, vc / denom, 0.0)

        m = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)          # edge BC
        dbc = (d4 - d3) + (d5 - d6)
        wbc = np.where(dbc != 0.0, (d4 - d3) / dbc, 0.0)
        v = np.where(m, 1.0 - wbc, v)
        w = np.where(m, wbc, w)

        m = (vb <= 0) & (d2 >= 0) & (d6 <= 0)                    # edge AC
        dac = d2 - d6
        wac = np.where(dac != 0.0, d2 / dac, 0.0)
        v = np.where(m, 0.0, v)
        w = np.where(m, wac, w)

        m = (d6 >= 0) & (d5 <= d6)                               # vertex C
        v = np.where(m, 0.0, v)
        w = np.where(m, 1.0, w)

        m = (vc <= 0) & (d1 >= 0) & (d3 <= 0)                    # edge AB
        dab = d1 - d3
        vab = np.where(dab != 0.0, d1 / dab, 0.0)
        v = np.where(m, vab, v)
        w = np.where(m, 0.0, w)

        m = (d3 >= 0) & (d4 <= d3)                               # vertex B
        v = np.where(m, 1.0, v)
        w = np.where(m, 0.0, w)

        m = (d1 <= 0) & (d2 <= 0)                                # vertex A
        v = np.where(m, 0.0, v)
        w = np.where(m, 0.0, w)

    pt = a + v[..., None] * ab + w[..., None] * ac
    diff = p - pt
    return _dot(diff, diff), pt


def closest_point_brute(q, v0, v1, v2):
    """Exhaustive closest point on a triangle set for each query.

    Ties broken toward the lowest triangle index. Returns
    (dist, point, tri_index).
    """
    n = q.shape[0]
    dist = np.empty(n)
    pts = np.empty((n, 3))
    idx = np.empty(n, dtype=np.int64)
    chunk = max(1, int(2_000_000 // max(1, v0.shape[0])))
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        d2, p = closest_point_triangles(q[s:e, None, :], v0[None], v1[None], v2[None])
        k = np.argmin(d2, axis=1)  # first occurrence == lowest index on ties
        r = np.arange(e - s)
        dist[s:e] = np.sqrt(d2[r, k])
        pts[s:e] = p[r, k]
        idx[s:e] = k
    return dist, pts, idx


def _box_dist_sq(q, lo, hi):
    d = np.maximum(lo - q, 0.0) + np.maximum(q - hi, 0.0)
    return _dot(d, d)


def bvh_closest_point(q, nlo, nhi, nleft, nright, nstart, ncount, order, v0, v1, v2):
    """Closest point on the mesh through the BVH, node-major traversal.

    All queries descend together; subtrees are pruned per query against its
    current best. Results are identical to ``closest_point_brute``
    (same formula, same tie-break).
    """
    n = q.shape[0]
    best = np.full(n, np.inf)
    bidx = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    bpt = np.zeros((n, 3))

    stack = [(0, np.arange(n))]
    while stack:
        node, sel = stack.pop()
        d2box = _box_dist_sq(q[sel], nlo[node], nhi[node])
        sel = sel[d2box <= best[sel]]
        if sel.size == 0:
            continue
        if ncount[node] > 0:
            tris = order[nstart[node]:nstart[node] + ncount[node]]
            d2, p = closest_point_triangles(
                q[sel, None, :], v0[tris][None], v1[tris][None], v2[tris][None])
            for j, t in enumerate(tris):
                upd = (d2[:, j] < best[sel]) | (
                    (d2[:, j] == best[sel]) & (t < bidx[sel]))
                u = sel[upd]
                best[u] = d2[upd, j]
                bidx[u] = t
                bpt[u] = p[upd, j]
        else:
            stack.append((nright[node], sel))
            stack.append((nleft[node], sel))
    return np.sqrt(best), bpt, bidx


def _ray_hits(orig, d, v0, v1, v2):
    """Forward crossing count and grazing flags for rays (orig, d).

    orig: (n,3), d: (3,) shared direction or (n,3). Counts strictly
    interior hits with t > T_EPS; flags anything within the shared
    robustness margins for a retried, perturbed direction.
    """
    d = np.broadcast_to(d, orig.shape)
    e1 = (v1 - v0)[None]
    e2 = (v2 - v0)[None]
    n = orig.shape[0]
    count = np.zeros(n, dtype=np.int64)
    graze = np.zeros(n, dtype=bool)
    scale = np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)  # 2*area

    chunk = max(1, int(2_000_000 // max(1, v0.shape[0])))
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        o = orig[s:e, None, :]
        dd = d[s:e, None, :]
        pv = np.cross(dd, e2)
        det = _dot(e1, pv)
        tv = o - v0[None]
        near_par = np.abs(det) <= PARALLEL_EPS * scale[None]
        # parallel and almost coplanar => parity undecidable along this ray
        nrm = np.cross(e1, e2)
        plane = np.abs(_dot(tv, nrm))
        coplanar = plane <= 1e-9 * scale[None] * (1.0 + np.sqrt(_dot(o, o)))
        graze[s:e] |= np.any(near_par & coplanar, axis=1)

        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(near_par, 0.0, 1.0 / np.where(det == 0, 1.0, det))
        u = _dot(tv, pv) * inv
        qv = np.cross(tv, e1)
        v = _dot(dd, qv) * inv
        t = _dot(e2, qv) * inv
        ok = ~near_par
        inside = ok & (u > BARY_EPS) & (v > BARY_EPS) & (u + v < 1.0 - BARY_EPS)
        hit = inside & (t > T_GRAZE)
        count[s:e] = np.sum(hit, axis=1)
        boundary = ok & (u > -BARY_EPS) & (v > -BARY_EPS) & (u + v < 1.0 + BARY_EPS)
        edge_graze = boundary & ~inside & (t > T_EPS)
        t_graze = inside & (t > T_EPS) & (t <= T_GRAZE)
        graze[s:e] |= np.any(edge_graze | t_graze, axis=1)
    return count, graze


def ray_crossings(orig, direction, nlo, nhi, nleft, nright, nstart, ncount,
                  order, v0, v1, v2):
    """Crossing parity input: forward hit count and grazing flags.

    The fallback tests every triangle; the BVH arrays are accepted for
    signature compatibility with the compiled core.
    """
    return _ray_hits(np.atleast_2d(orig), direction, v0, v1, v2)


def trilinear_sample(values, origin, voxel, q, with_grad=False):
    """Trilinear interpolation of voxel-center samples at points q.

    values is indexed [ix, iy, iz]; voxel centers sit at
    origin + (i + 0.5) * voxel. Out-of-grid queries clamp to the boundary
    cell (constant extension), where the spatial gradient is zero.
    """
    nres = np.asarray(values.shape)
    g0 = (q - origin[None]) / voxel - 0.5
    g = np.clip(g0, 0.0, (nres - 1).astype(float)[None])
    i = np.minimum(g.astype(np.int64), (nres - 2)[None])
    i = np.maximum(i, 0)
    f = g - i

    ix, iy, iz = i[:, 0], i[:, 1], i[:, 2]
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
    c000 = values[ix, iy, iz]
    c100 = values[ix + 1, iy, iz]
    c010 = values[ix, iy + 1, iz]
    c110 = values[ix + 1, iy + 1, iz]
    c001 = values[ix, iy, iz + 1]
    c101 = values[ix + 1, iy, iz + 1]
    c011 = values[ix, iy + 1, iz + 1]
    c111 = values[ix + 1, iy + 1, iz + 1]

    wx, wy, wz = 1.0 - fx, 1.0 - fy, 1.0 - fz
    vals = (c000 * wx * wy * wz + c100 * fx * wy * wz
            + c010 * wx * fy * wz + c110 * fx * fy * wz
            + c001 * wx * wy * fz + c101 * fx * wy * fz
            + c011 * wx * fy * fz + c111 * fx * fy * fz)
    if not with_grad:
        return vals

    inside = (g0 > 0.0) & (g0 < (nres - 1).astype(float)[None])
    gx = ((c100 - c000) * wy * wz + (c110 - c010) * fy * wz
          + (c101 - c001) * wy * fz + (c111 - c011) * fy * fz)
    gy = ((c010 - c000) * wx * wz + (c110 - c100) * fx * wz
          + (c011 - c001) * wx * fz + (c111 - c101) * fx * fz)
    gz = ((c001 - c000) * wx * wy + (c101 - c100) * fx * wy
          + (c011 - c010) * wx * fy + (c111 - c110) * fx * fy)
    grad = np.stack([gx, gy, gz], axis=1) / voxel
    grad *= inside
    return vals, grad


def pairwise_min_dist(a, b):
    """For each row of a, the minimum distance to rows of b and its index."""
    na = a.shape[0]
    dist = np.empty(na)
    idx = np.empty(na, dtype=np.int64)
    chunk = max(1, int(4_000_000 // max(1, b.shape[0])))
    for s in range(0, na, chunk):
        e = min(na, s + chunk)
        diff = a[s:e, None, :] - b[None]
        d2 = _dot(diff, diff)
        k = np.argmin(d2, axis=1)
        dist[s:e] = np.sqrt(d2[np.arange(e - s), k])
        idx[s:e] = k
    return dist, idx
