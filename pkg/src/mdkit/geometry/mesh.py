"""Triangle meshes: validation, watertightness, Wavefront OBJ I/O."""

import numpy as np

from ..errors import DegenerateTriangle, EmptyMesh, FormatError

DEGENERATE_AREA_EPS = 1e-12  # twice-area threshold, square meters


class TriangleMesh:
    """An indexed triangle set in meters.

    vertices: (n, 3) float64, triangles: (m, 3) int64 vertex indices.
    Validation rejects empty meshes, out-of-range indices and
    (near-)zero-area triangles; sign queries additionally require the mesh
    to be watertight (every undirected edge shared by exactly two
    triangles).
    """

    def __init__(self, vertices, triangles, validate=True):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise FormatError("vertices must be (n, 3)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise FormatError("triangles must be (m, 3)")
        if validate:
            self.validate()

    def validate(self):
        if self.triangles.shape[0] == 0 or self.vertices.shape[0] == 0:
            raise EmptyMesh("mesh has no geometry")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise FormatError("triangle index out of range")
        a, b, c = self.corners()
        twice_area = np.linalg.norm(np.cross(b - a, c - a), axis=1)
        bad = np.nonzero(twice_area < DEGENERATE_AREA_EPS)[0]
        if bad.size:
            raise DegenerateTriangle(int(bad[0]))

    def corners(self):
        """Per-triangle corner arrays (v0, v1, v2), each (m, 3) contiguous."""
        v = self.vertices
        t = self.triangles
        return (np.ascontiguousarray(v[t[:, 0]]),
                np.ascontiguousarray(v[t[:, 1]]),
                np.ascontiguousarray(v[t[:, 2]]))

    @property
    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def is_watertight(self) -> bool:
        e = np.concatenate([self.triangles[:, [0, 1]],
                            self.triangles[:, [1, 2]],
                            self.triangles[:, [2, 0]]])
        e = np.sort(e, axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return bool(np.all(counts == 2))

    def area(self) -> float:
        a, b, c = self.corners()
        return float(0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1).sum())


def merge_meshes(meshes) -> TriangleMesh:
    """Disjoint union of meshes (solids must not overlap for sign queries)."""
    verts = []
    tris = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        offset += len(m.vertices)
    return TriangleMesh(np.concatenate(verts), np.concatenate(tris))


def load_obj(path) -> TriangleMesh:
    """Wavefront OBJ reader: v/f records only, fan-triangulated polygons."""
    verts = []
    tris = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise FormatError(f"{path}:{lineno}: short vertex record")
                verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif parts[0] == "f":
                if len(parts) < 4:
                    raise FormatError(f"{path}:{lineno}: face needs >= 3 vertices")
                idx = []
                for tok in parts[1:]:
                    i = int(tok.split("/")[0])
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                for k in range(1, len(idx) - 1):
                    tris.append([idx[0], idx[k], idx[k + 1]])
    if not tris:
        raise EmptyMesh(f"{path}: no faces")
    return TriangleMesh(np.array(verts), np.array(tris))


def save_obj(mesh: TriangleMesh, path):
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")
