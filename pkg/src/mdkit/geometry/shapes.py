"""Watertight primitive meshes used by the synthetic scenes and the tests."""

import numpy as np

from .mesh import TriangleMesh


def box_mesh(center, size) -> TriangleMesh:
    """Axis-aligned box; center (3,), size (3,) full extents."""
    c = np.asarray(center, dtype=float)
    h = np.asarray(size, dtype=float) / 2.0
    corners = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
                       dtype=float)
    verts = c + corners * h
    # corner index = 4*x + 2*y + z with each in {0,1}
    quads = [
        (0, 1, 3, 2),  # -x
        (4, 6, 7, 5),  # +x
        (0, 4, 5, 1),  # -y
        (2, 3, 7, 6),  # +y
        (0, 2, 6, 4),  # -z
        (1, 5, 7, 3),  # +z
    ]
    tris = []
    for a, b, cc, d in quads:
        tris.append([a, b, cc])
        tris.append([a, cc, d])
    return TriangleMesh(verts, np.array(tris))


def cylinder_mesh(base_center, radius, height, segments=24) -> TriangleMesh:
    """Closed upright cylinder, base at base_center, axis +z."""
    b = np.asarray(base_center, dtype=float)
    ang = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang),
                     np.zeros(segments)], axis=1)
    verts = [b + ring, b + ring + [0, 0, height],
             [b], [b + [0, 0, height]]]
    verts = np.concatenate([np.atleast_2d(v) for v in verts])
    bot = 2 * segments
    top = 2 * segments + 1
    tris = []
    for i in range(segments):
        j = (i + 1) % segments
        tris.append([i, j, segments + j])          # side
        tris.append([i, segments + j, segments + i])
        tris.append([bot, j, i])                    # bottom cap (faces -z)
        tris.append([top, segments + i, segments + j])  # top cap (faces +z)
    return TriangleMesh(verts, np.array(tris))


def icosphere(radius=1.0, subdivisions=2, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Subdivided icosahedron projected onto the sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts[0])
    tris = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)

    for _ in range(subdivisions):
        verts_list = list(verts)
        midpoint = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in midpoint:
                m = verts_list[i] + verts_list[j]
                m = m / np.linalg.norm(m)
                midpoint[key] = len(verts_list)
                verts_list.append(m)
            return midpoint[key]

        out = []
        for a, b, c in tris:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            out += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        verts = np.array(verts_list)
        tris = np.array(out, dtype=np.int64)

    return TriangleMesh(np.asarray(center, dtype=float) + radius * verts, tris)
