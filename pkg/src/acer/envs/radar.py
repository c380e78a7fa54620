"""Ray casting against ground-standing hemispheres and the ground plane."""
from __future__ import annotations

import math

import numpy as np

from .._accel import HAS_NUMBA, njit


def body_ray_directions(azimuths_deg, elevations_deg) -> np.ndarray:
    """Unit vectors in the body frame (x forward, y left, z up), azimuth-major."""
    dirs = []
    for el in np.radians(np.asarray(elevations_deg, dtype=np.float64)):
        for az in np.radians(np.asarray(azimuths_deg, dtype=np.float64)):
            dirs.append((math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)))
    return np.array(dirs)


def rotate_body_to_world(dirs: np.ndarray, yaw: float, pitch: float) -> np.ndarray:
    """Pitch about the body y axis (nose up positive), then yaw about world z."""
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    x = dirs[:, 0] * cp - dirs[:, 2] * sp
    z = dirs[:, 0] * sp + dirs[:, 2] * cp
    y = dirs[:, 1]
    return np.stack([x * cy - y * sy, x * sy + y * cy, z], axis=1)


@njit
def _scan_nb(origin, dirs, centers, radii, max_range):
    n = dirs.shape[0]
    out = np.empty(n)
    ox, oy, oz = origin[0], origin[1], origin[2]
    inside = False
    for k in range(centers.shape[0]):
        dx, dy = ox - centers[k, 0], oy - centers[k, 1]
        if oz >= 0.0 and dx * dx + dy * dy + oz * oz <= radii[k] * radii[k]:
            inside = True
    for i in range(n):
        if inside:
            out[i] = 0.0
            continue
        best = max_range
        ux, uy, uz = dirs[i, 0], dirs[i, 1], dirs[i, 2]
        if uz < 0.0:
            t = -oz / uz
            if t < best:
                best = t
        for k in range(centers.shape[0]):
            fx, fy = ox - centers[k, 0], oy - centers[k, 1]
            b = fx * ux + fy * uy + oz * uz
            c = fx * fx + fy * fy + oz * oz - radii[k] * radii[k]
            disc = b * b - c
            if disc < 0.0:
                continue
            t = -b - math.sqrt(disc)
            if 0.0 <= t < best and oz + t * uz >= 0.0:
                best = t
        out[i] = max(best, 0.0)
    return out


def _scan_np(origin, dirs, centers, radii, max_range):
    n = dirs.shape[0]
    best = np.full(n, float(max_range))
    oz = origin[2]
    if centers.shape[0]:
        f = np.array([origin[0], origin[1], oz]) - np.column_stack([centers, np.zeros(len(centers))])
        if oz >= 0.0 and np.any(np.einsum("ij,ij->i", f, f) <= radii ** 2):
            return np.zeros(n)
        b = dirs @ f.T
        c = np.einsum("ij,ij->i", f, f) - radii ** 2
        disc = b * b - c[None, :]
        with np.errstate(invalid="ignore"):
            t = -b - np.sqrt(disc)
        ok = (disc >= 0.0) & (t >= 0.0) & (oz + t * dirs[:, 2:3] >= 0.0)
        t = np.where(ok, t, np.inf)
        best = np.minimum(best, t.min(axis=1))
    down = dirs[:, 2] < 0.0
    with np.errstate(divide="ignore"):
        tg = np.where(down, -oz / np.where(down, dirs[:, 2], -1.0), np.inf)
    best = np.minimum(best, tg)
    return np.maximum(best, 0.0)


_scan = _scan_nb if HAS_NUMBA else _scan_np


def cast_rays(origin, dirs_world, centers, radii, max_range: float) -> np.ndarray:
    """Distance along each ray to the first obstacle dome or the ground, capped at ``max_range``.

    A ray origin inside a dome reads 0 on every ray.
    """
    return _scan(np.asarray(origin, dtype=np.float64), np.ascontiguousarray(dirs_world, dtype=np.float64),
                 np.ascontiguousarray(np.asarray(centers, dtype=np.float64).reshape(-1, 2)),
                 np.asarray(radii, dtype=np.float64).reshape(-1), float(max_range))


def scan_numpy(origin, dirs_world, centers, radii, max_range):
    return _scan_np(np.asarray(origin, dtype=np.float64), np.asarray(dirs_world, dtype=np.float64),
                    np.asarray(centers, dtype=np.float64).reshape(-1, 2),
                    np.asarray(radii, dtype=np.float64).reshape(-1), float(max_range))


def scan_numba(origin, dirs_world, centers, radii, max_range):
    if not HAS_NUMBA:
        raise RuntimeError("numba backend disabled")
    return _scan_nb(np.asarray(origin, dtype=np.float64), np.ascontiguousarray(dirs_world, dtype=np.float64),
                    np.ascontiguousarray(np.asarray(centers, dtype=np.float64).reshape(-1, 2)),
                    np.asarray(radii, dtype=np.float64).reshape(-1), float(max_range))
