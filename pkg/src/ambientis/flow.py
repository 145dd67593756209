"""Coarse-to-fine dense Lucas-Kanade optical flow.

Each pyramid level refines the upsampled estimate from the level below by a
few Gauss-Newton steps: warp the second image back by the current flow,
solve the windowed 2x2 normal equations for a correction, repeat.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

MIN_LEVEL_SIZE = 8


def to_gray(rgb: np.ndarray) -> np.ndarray:
    return rgb.astype(np.float64).mean(axis=2)


def _pyramid(img: np.ndarray, levels: int) -> list[np.ndarray]:
    pyr = [img]
    for _ in range(levels - 1):
        smooth = ndimage.gaussian_filter(pyr[-1], 1.0, mode="nearest")
        nxt = smooth[::2, ::2]
        if min(nxt.shape) < MIN_LEVEL_SIZE:
            break
        pyr.append(nxt)
    return pyr


def _upsample(flow: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    zoom = (shape[0] / flow.shape[0], shape[1] / flow.shape[1])
    up = ndimage.zoom(flow, zoom, order=1, mode="nearest", grid_mode=True)
    # zoom may be off by one pixel for odd sizes
    out = np.zeros(shape)
    h, w = min(shape[0], up.shape[0]), min(shape[1], up.shape[1])
    out[:h, :w] = up[:h, :w]
    if h < shape[0]:
        out[h:, :w] = up[h - 1, :w]
    if w < shape[1]:
        out[:, w:] = out[:, w - 1:w]
    return out * 2.0


def lucas_kanade(prev: np.ndarray, cur: np.ndarray, *, levels: int = 3,
                 iterations: int = 5, sigma: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """Flow (u, v) such that ``cur[y + v, x + u] ~= prev[y, x]``.

    ``prev`` and ``cur`` are 2-D float arrays of equal shape. ``sigma`` is
    the Gaussian integration window of the local least-squares fit.
    """
    if prev.shape != cur.shape:
        raise ValueError(f"shape mismatch {prev.shape} vs {cur.shape}")
    prev_pyr = _pyramid(prev, levels)
    cur_pyr = _pyramid(cur, len(prev_pyr))
    u = np.zeros(prev_pyr[-1].shape)
    v = np.zeros(prev_pyr[-1].shape)
    for level in range(len(prev_pyr) - 1, -1, -1):
        p, c = prev_pyr[level], cur_pyr[level]
        if u.shape != p.shape:
            u, v = _upsample(u, p.shape), _upsample(v, p.shape)
        gy, gx = np.gradient(p)
        rows, cols = np.indices(p.shape, dtype=np.float64)
        for _ in range(iterations):
            warped = ndimage.map_coordinates(c, [rows + v, cols + u], order=1, mode="nearest")
            wy, wx = np.gradient(warped)
            ix, iy = 0.5 * (gx + wx), 0.5 * (gy + wy)
            it = warped - p
            products = np.stack([ix * ix, iy * iy, ix * iy, ix * it, iy * it])
            sxx, syy, sxy, sxt, syt = ndimage.gaussian_filter(products, (0, sigma, sigma))
            det = sxx * syy - sxy * sxy
            ok = det > 1e-6 * (sxx + syy + 1e-12) ** 2
            safe = np.where(ok, det, 1.0)
            du = np.where(ok, (-syy * sxt + sxy * syt) / safe, 0.0)
            dv = np.where(ok, (sxy * sxt - sxx * syt) / safe, 0.0)
            u = u + du
            v = v + dv
            if np.max(np.abs(du)) < 1e-3 and np.max(np.abs(dv)) < 1e-3:
                break
    return u, v
