# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel core.

Mirrors the contracts of the pure-numpy backend in ``_ref.py``: identical
closest-point formula and region priority, identical tie-breaking and
grazing thresholds. Scalar loops with per-query BVH traversal; this is the
backend that makes voxelization and training-loss queries fast.
"""

import numpy as np

cimport cython
from libc.math cimport fabs, sqrt

DEF BARY_EPS = 1e-9
DEF T_EPS = 1e-12
DEF T_GRAZE = 1e-9
DEF PARALLEL_EPS = 1e-9
DEF STACK_CAP = 128


cdef inline double _clamp(double x, double lo, double hi) nogil:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


@cython.cdivision(True)
cdef inline double _tri_closest(double px, double py, double pz,
                                double ax, double ay, double az,
                                double bx, double by, double bz,
                                double cx, double cy, double cz,
                                double* ox, double* oy, double* oz) nogil:
    """Squared distance from p to triangle abc; closest point in (ox,oy,oz)."""
    cdef double abx = bx - ax, aby = by - ay, abz = bz - az
    cdef double acx = cx - ax, acy = cy - ay, acz = cz - az
    cdef double apx = px - ax, apy = py - ay, apz = pz - az
    cdef double d1 = abx * apx + aby * apy + abz * apz
    cdef double d2 = acx * apx + acy * apy + acz * apz
    cdef double bpx = px - bx, bpy = py - by, bpz = pz - bz
    cdef double d3 = abx * bpx + aby * bpy + abz * bpz
    cdef double d4 = acx * bpx + acy * bpy + acz * bpz
    cdef double cpx = px - cx, cpy = py - cy, cpz = pz - cz
    cdef double d5 = abx * cpx + aby * cpy + abz * cpz
    cdef double d6 = acx * cpx + acy * cpy + acz * cpz
    cdef double vc = d1 * d4 - d3 * d2
    cdef double vb = d5 * d2 - d1 * d6
    cdef double va = d3 * d6 - d5 * d4
    cdef double v, w, denom
    if d1 <= 0 and d2 <= 0:                      # vertex A
        v = 0.0; w = 0.0
    elif d3 >= 0 and d4 <= d3:                   # vertex B
        v = 1.0; w = 0.0
    elif vc <= 0 and d1 >= 0 and d3 <= 0:        # edge AB
        denom = d1 - d3
        v = d1 / denom if denom != 0.0 else 0.0
        w = 0.0
    elif d6 >= 0 and d5 <= d6:                   # vertex C
        v = 0.0; w = 1.0
    elif vb <= 0 and d2 >= 0 and d6 <= 0:        # edge AC
        denom = d2 - d6
        v = 0.0
        w = d2 / denom if denom != 0.0 else 0.0
    elif va <= 0 and d4 - d3 >= 0 and d5 - d6 >= 0:   # edge BC
        denom = (d4 - d3) + (d5 - d6)
        w = (d4 - d3) / denom if denom != 0.0 else 0.0
        v = 1.0 - w
    else:                                        # interior
        denom = va + vb + vc
        if denom != 0.0:
            v = vb / denom
            w = vc / denom
        else:
            v = 0.0; w = 0.0
    ox[0] = ax + v * abx + w * acx
    oy[0] = ay + v * aby + w * acy
    oz[0] = az + v * abz + w * acz
    cdef double dx = px - ox[0], dy = py - oy[0], dz = pz - oz[0]
    return dx * dx + dy * dy + dz * dz


def closest_point_brute(double[:, ::1] q, double[:, ::1] v0,
                        double[:, ::1] v1, double[:, ::1] v2):
    cdef Py_ssize_t n = q.shape[0], m = v0.shape[0], i, j
    dist = np.empty(n)
    pts = np.empty((n, 3))
    idx = np.empty(n, dtype=np.int64)
    cdef double[::1] dist_v = dist
    cdef double[:, ::1] pts_v = pts
    cdef long long[::1] idx_v = idx
    cdef double best, d2, cx, cy, cz, bx, by, bz
    cdef long long bi
    with nogil:
        for i in range(n):
            best = 1e300
            bi = 0
            bx = by = bz = 0.0
            for j in range(m):
                d2 = _tri_closest(q[i, 0], q[i, 1], q[i, 2],
                                  v0[j, 0], v0[j, 1], v0[j, 2],
                                  v1[j, 0], v1[j, 1], v1[j, 2],
                                  v2[j, 0], v2[j, 1], v2[j, 2],
                                  &cx, &cy, &cz)
                if d2 < best or (d2 == best and j < bi):
                    best = d2
                    bi = j
                    bx = cx; by = cy; bz = cz
            dist_v[i] = sqrt(best)
            pts_v[i, 0] = bx; pts_v[i, 1] = by; pts_v[i, 2] = bz
            idx_v[i] = bi
    return dist, pts, idx


cdef inline double _box_dist_sq(double qx, double qy, double qz,
                                double lx, double ly, double lz,
                                double hx, double hy, double hz) nogil:
    cdef double dx = 0.0, dy = 0.0, dz = 0.0
    if qx < lx: dx = lx - qx
    elif qx > hx: dx = qx - hx
    if qy < ly: dy = ly - qy
    elif qy > hy: dy = qy - hy
    if qz < lz: dz = lz - qz
    elif qz > hz: dz = qz - hz
    return dx * dx + dy * dy + dz * dz


def bvh_closest_point(double[:, ::1] q,
                      double[:, ::1] nlo, double[:, ::1] nhi,
                      long long[::1] nleft, long long[::1] nright,
                      long long[::1] nstart, long long[::1] ncount,
                      long long[::1] order,
                      double[:, ::1] v0, double[:, ::1] v1, double[:, ::1] v2):
    cdef Py_ssize_t n = q.shape[0], i, k
    dist = np.empty(n)
    pts = np.empty((n, 3))
    idx = np.empty(n, dtype=np.int64)
    cdef double[::1] dist_v = dist
    cdef double[:, ::1] pts_v = pts
    cdef long long[::1] idx_v = idx
    cdef long long stack[STACK_CAP]
    cdef int sp
    cdef long long node, t, bi, left, right
    cdef double best, d2, dl, dr, cx, cy, cz, bx, by, bz, qx, qy, qz
    with nogil:
        for i in range(n):
            qx = q[i, 0]; qy = q[i, 1]; qz = q[i, 2]
            best = 1e300
            bi = 9223372036854775807
            bx = by = bz = 0.0
            sp = 0
            stack[sp] = 0
            sp += 1
            while sp > 0:
                sp -= 1
                node = stack[sp]
                if _box_dist_sq(qx, qy, qz,
                                nlo[node, 0], nlo[node, 1], nlo[node, 2],
                                nhi[node, 0], nhi[node, 1], nhi[node, 2]) > best:
                    continue
                if ncount[node] > 0:
                    for k in range(nstart[node], nstart[node] + ncount[node]):
                        t = order[k]
                        d2 = _tri_closest(qx, qy, qz,
                                          v0[t, 0], v0[t, 1], v0[t, 2],
                                          v1[t, 0], v1[t, 1], v1[t, 2],
                                          v2[t, 0], v2[t, 1], v2[t, 2],
                                          &cx, &cy, &cz)
                        if d2 < best or (d2 == best and t < bi):
                            best = d2
                            bi = t
                            bx = cx; by = cy; bz = cz
                else:
                    left = nleft[node]
                    right = nright[node]
                    dl = _box_dist_sq(qx, qy, qz,
                                      nlo[left, 0], nlo[left, 1], nlo[left, 2],
                                      nhi[left, 0], nhi[left, 1], nhi[left, 2])
                    dr = _box_dist_sq(qx, qy, qz,
                                      nlo[right, 0], nlo[right, 1], nlo[right, 2],
                                      nhi[right, 0], nhi[right, 1], nhi[right, 2])
                    # push farther child first so the nearer is explored first
                    if dl <= dr:
                        if dr <= best:
                            stack[sp] = right; sp += 1
                        if dl <= best:
                            stack[sp] = left; sp += 1
                    else:
                        if dl <= best:
                            stack[sp] = left; sp += 1
                        if dr <= best:
                            stack[sp] = right; sp += 1
            dist_v[i] = sqrt(best)
            pts_v[i, 0] = bx; pts_v[i, 1] = by; pts_v[i, 2] = bz
            idx_v[i] = bi
    return dist, pts, idx


cdef inline bint _ray_box(double ox, double oy, double oz,
                          double dx, double dy, double dz,
                          double lx, double ly, double lz,
                          double hx, double hy, double hz) nogil:
    """Ray/AABB slab test for t >= 0, boxes inflated by a nanometer of slop."""
    cdef double tmin = 0.0, tmax = 1e300, inv, t1, t2, tmp
    cdef double lo, hi
    cdef int k
    cdef double o, d
    for k in range(3):
        if k == 0: o = ox; d = dx; lo = lx - 1e-9; hi = hx + 1e-9
        elif k == 1: o = oy; d = dy; lo = ly - 1e-9; hi = hy + 1e-9
        else: o = oz; d = dz; lo = lz - 1e-9; hi = hz + 1e-9
        if fabs(d) < 1e-300:
            if o < lo or o > hi:
                return 0
        else:
            inv = 1.0 / d
            t1 = (lo - o) * inv
            t2 = (hi - o) * inv
            if t1 > t2:
                tmp = t1; t1 = t2; t2 = tmp
            if t1 > tmin: tmin = t1
            if t2 < tmax: tmax = t2
            if tmin > tmax:
                return 0
    return 1


def ray_crossings(double[:, ::1] orig, object direction,
                  double[:, ::1] nlo, double[:, ::1] nhi,
                  long long[::1] nleft, long long[::1] nright,
                  long long[::1] nstart, long long[::1] ncount,
                  long long[::1] order,
                  double[:, ::1] v0, double[:, ::1] v1, double[:, ::1] v2):
    """Forward crossing count and grazing flags, BVH-accelerated."""
    dirs_arr = np.ascontiguousarray(
        np.broadcast_to(np.asarray(direction, dtype=np.float64),
                        (orig.shape[0], 3)))
    cdef double[:, ::1] dirs = dirs_arr
    cdef Py_ssize_t n = orig.shape[0], i, k
    counts = np.zeros(n, dtype=np.int64)
    grazes = np.zeros(n, dtype=np.uint8)
    cdef long long[::1] count_v = counts
    cdef unsigned char[::1] graze_v = grazes
    cdef long long stack[STACK_CAP]
    cdef int sp
    cdef long long node, t
    cdef double ox, oy, oz, dx, dy, dz
    cdef double e1x, e1y, e1z, e2x, e2y, e2z, pvx, pvy, pvz
    cdef double det, inv, tvx, tvy, tvz, u, v, tt, qvx, qvy, qvz
    cdef double nx, ny, nz, scale, plane, onorm
    cdef long long c
    cdef bint gz, inside, boundary
    with nogil:
        for i in range(n):
            ox = orig[i, 0]; oy = orig[i, 1]; oz = orig[i, 2]
            dx = dirs[i, 0]; dy = dirs[i, 1]; dz = dirs[i, 2]
            onorm = sqrt(ox * ox + oy * oy + oz * oz)
            c = 0
            gz = 0
            sp = 0
            stack[sp] = 0
            sp += 1
            while sp > 0:
                sp -= 1
                node = stack[sp]
                if not _ray_box(ox, oy, oz, dx, dy, dz,
                                nlo[node, 0], nlo[node, 1], nlo[node, 2],
                                nhi[node, 0], nhi[node, 1], nhi[node, 2]):
                    continue
                if ncount[node] == 0:
                    stack[sp] = nleft[node]; sp += 1
                    stack[sp] = nright[node]; sp += 1
                    continue
                for k in range(nstart[node], nstart[node] + ncount[node]):
                    t = order[k]
                    e1x = v1[t, 0] - v0[t, 0]; e1y = v1[t, 1] - v0[t, 1]; e1z = v1[t, 2] - v0[t, 2]
                    e2x = v2[t, 0] - v0[t, 0]; e2y = v2[t, 1] - v0[t, 1]; e2z = v2[t, 2] - v0[t, 2]
                    nx = e1y * e2z - e1z * e2y
                    ny = e1z * e2x - e1x * e2z
                    nz = e1x * e2y - e1y * e2x
                    scale = sqrt(nx * nx + ny * ny + nz * nz)
                    pvx = dy * e2z - dz * e2y
                    pvy = dz * e2x - dx * e2z
                    pvz = dx * e2y - dy * e2x
                    det = e1x * pvx + e1y * pvy + e1z * pvz
                    tvx = ox - v0[t, 0]; tvy = oy - v0[t, 1]; tvz = oz - v0[t, 2]
                    if fabs(det) <= PARALLEL_EPS * scale:
                        plane = fabs(tvx * nx + tvy * ny + tvz * nz)
                        if plane <= 1e-9 * scale * (1.0 + onorm):
                            gz = 1
                        continue
                    inv = 1.0 / det
                    u = (tvx * pvx + tvy * pvy + tvz * pvz) * inv
                    qvx = tvy * e1z - tvz * e1y
                    qvy = tvz * e1x - tvx * e1z
                    qvz = tvx * e1y - tvy * e1x
                    v = (dx * qvx + dy * qvy + dz * qvz) * inv
                    tt = (e2x * qvx + e2y * qvy + e2z * qvz) * inv
                    inside = u > BARY_EPS and v > BARY_EPS and u + v < 1.0 - BARY_EPS
                    if inside and tt > T_GRAZE:
                        c += 1
                    boundary = u > -BARY_EPS and v > -BARY_EPS and u + v < 1.0 + BARY_EPS
                    if boundary and not inside and tt > T_EPS:
                        gz = 1
                    if inside and tt > T_EPS and tt <= T_GRAZE:
                        gz = 1
            count_v[i] = c
            graze_v[i] = gz
    return counts, grazes.astype(bool)


def trilinear_sample(double[:, :, ::1] values, double[::1] origin,
                     double voxel, double[:, ::1] q, bint with_grad=False):
    cdef Py_ssize_t n = q.shape[0], i, a
    cdef Py_ssize_t nx = values.shape[0], ny = values.shape[1], nz = values.shape[2]
    vals = np.empty(n)
    cdef double[::1] vals_v = vals
    grads = np.zeros((n, 3)) if with_grad else None
    cdef double[:, ::1] grads_v = grads if with_grad else None
    cdef double g0x, g0y, g0z, gx, gy, gz, fx, fy, fz, wx, wy, wz
    cdef Py_ssize_t ix, iy, iz
    cdef double c000, c100, c010, c110, c001, c101, c011, c111
    with nogil:
        for i in range(n):
            g0x = (q[i, 0] - origin[0]) / voxel - 0.5
            g0y = (q[i, 1] - origin[1]) / voxel - 0.5
            g0z = (q[i, 2] - origin[2]) / voxel - 0.5
            gx = _clamp(g0x, 0.0, nx - 1.0)
            gy = _clamp(g0y, 0.0, ny - 1.0)
            gz = _clamp(g0z, 0.0, nz - 1.0)
            ix = <Py_ssize_t>gx
            iy = <Py_ssize_t>gy
            iz = <Py_ssize_t>gz
            if ix > nx - 2: ix = nx - 2
            if iy > ny - 2: iy = ny - 2
            if iz > nz - 2: iz = nz - 2
            fx = gx - ix; fy = gy - iy; fz = gz - iz
            wx = 1.0 - fx; wy = 1.0 - fy; wz = 1.0 - fz
            c000 = values[ix, iy, iz]
            c100 = values[ix + 1, iy, iz]
            c010 = values[ix, iy + 1, iz]
            c110 = values[ix + 1, iy + 1, iz]
            c001 = values[ix, iy, iz + 1]
            c101 = values[ix + 1, iy, iz + 1]
            c011 = values[ix, iy + 1, iz + 1]
            c111 = values[ix + 1, iy + 1, iz + 1]
            vals_v[i] = (c000 * wx * wy * wz + c100 * fx * wy * wz
                         + c010 * wx * fy * wz + c110 * fx * fy * wz
                         + c001 * wx * wy * fz + c101 * fx * wy * fz
                         + c011 * wx * fy * fz + c111 * fx * fy * fz)
            if with_grad:
                if g0x > 0.0 and g0x < nx - 1.0:
                    grads_v[i, 0] = ((c100 - c000) * wy * wz + (c110 - c010) * fy * wz
                                     + (c101 - c001) * wy * fz + (c111 - c011) * fy * fz) / voxel
                if g0y > 0.0 and g0y < ny - 1.0:
                    grads_v[i, 1] = ((c010 - c000) * wx * wz + (c110 - c100) * fx * wz
                                     + (c011 - c001) * wx * fz + (c111 - c101) * fx * fz) / voxel
                if g0z > 0.0 and g0z < nz - 1.0:
                    grads_v[i, 2] = ((c001 - c000) * wx * wy + (c101 - c100) * fx * wy
                                     + (c011 - c010) * wx * fy + (c111 - c110) * fx * fy) / voxel
    if with_grad:
        return vals, grads
    return vals


def pairwise_min_dist(double[:, ::1] a, double[:, ::1] b):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], i, j
    dist = np.empty(na)
    idx = np.empty(na, dtype=np.int64)
    cdef double[::1] dist_v = dist
    cdef long long[::1] idx_v = idx
    cdef double best, d2, dx, dy, dz
    cdef long long bi
    with nogil:
        for i in range(na):
            best = 1e300
            bi = 0
            for j in range(nb):
                dx = a[i, 0] - b[j, 0]
                dy = a[i, 1] - b[j, 1]
                dz = a[i, 2] - b[j, 2]
                d2 = dx * dx + dy * dy + dz * dz
                if d2 < best:
                    best = d2
                    bi = j
            dist_v[i] = sqrt(best)
            idx_v[i] = bi
    return dist, idx
