import numpy as np
import pytest

from pvimine import default_scene
from pvimine.trajectory import RawTrack, resample_and_smooth


@pytest.fixture(scope="session")
def scene():
    return default_scene()


def raw_track(track_id, cls, t, x, y, length=None, width=None, heading=None):
    """Build a RawTrack with per-sample optional arrays filled from scalars."""
    t = np.asarray(t, dtype=float)
    n = len(t)

    def arr(value):
        if value is None:
            return np.full(n, np.nan)
        return np.full(n, float(value)) if np.isscalar(value) else np.asarray(value, float)

    return RawTrack(track_id, cls, t, np.asarray(x, float), np.asarray(y, float),
                    arr(length), arr(width), arr(heading))


def straight_track(track_id, cls, start, velocity, t0, t1, dt=0.04, **dims):
    """Constant-velocity raw track from ``start`` along ``velocity``."""
    t = np.arange(t0, t1 + dt / 2, dt)
    x = start[0] + velocity[0] * (t - t0)
    y = start[1] + velocity[1] * (t - t0)
    return raw_track(track_id, cls, t, x, y, **dims)


def track_from_speed(track_id, speeds, dt=0.04, cls="pedestrian", x0=0.0, y0=0.0,
                     axis="y", **dims):
    """Raw track moving along one axis with the given per-sample speeds."""
    speeds = np.asarray(speeds, dtype=float)
    t = dt * np.arange(len(speeds))
    pos = np.concatenate([[0.0], np.cumsum(0.5 * (speeds[1:] + speeds[:-1]) * dt)])
    if axis == "y":
        x, y = np.full(len(t), x0), y0 + pos
    else:
        x, y = x0 + pos, np.full(len(t), y0)
    return raw_track(track_id, cls, t, x, y, **dims)


def resample(raw, **kwargs):
    return resample_and_smooth(raw, **kwargs)


# ---------------------------------------------------------------------------
# Independent geometry oracles (no shapely)
# ---------------------------------------------------------------------------

def points_in_convex(vertices, xs, ys):
    """Vectorized membership test against a convex polygon (any orientation)."""
    verts = np.asarray(vertices, dtype=float)
    area2 = np.sum(verts[:, 0] * np.roll(verts[:, 1], -1)
                   - np.roll(verts[:, 0], -1) * verts[:, 1])
    if area2 < 0:
        verts = verts[::-1]
    inside = np.ones(len(xs), dtype=bool)
    for i in range(len(verts)):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % len(verts)]
        cross = (bx - ax) * (ys - ay) - (by - ay) * (xs - ax)
        inside &= cross >= -1e-12
    return inside


def mc_union_area(convex_list, bbox, n_points, seed=0):
    """Monte-Carlo area of a union of convex polygons."""
    rng = np.random.default_rng(seed)
    (x0, y0), (x1, y1) = bbox
    xs = rng.uniform(x0, x1, n_points)
    ys = rng.uniform(y0, y1, n_points)
    inside = np.zeros(n_points, dtype=bool)
    for verts in convex_list:
        rest = ~inside
        if not rest.any():
            break
        inside[rest] = points_in_convex(verts, xs[rest], ys[rest])
    return inside.mean() * (x1 - x0) * (y1 - y0)


def mc_intersection_area(verts_a, verts_b, bbox, n_points, seed=0):
    """Monte-Carlo area of the intersection of two convex polygons."""
    rng = np.random.default_rng(seed)
    (x0, y0), (x1, y1) = bbox
    xs = rng.uniform(x0, x1, n_points)
    ys = rng.uniform(y0, y1, n_points)
    inside = points_in_convex(verts_a, xs, ys) & points_in_convex(verts_b, xs, ys)
    return inside.mean() * (x1 - x0) * (y1 - y0)


def random_convex_polygon(rng, n_min=4, n_max=9, radius=3.0):
    """Random convex polygon: convex position sampled on a noisy circle."""
    n = rng.integers(n_min, n_max + 1)
    angles = np.sort(rng.uniform(0.0, 2 * np.pi, n))
    radii = rng.uniform(0.4 * radius, radius, n)
    verts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    # convex hull of the sampled points (gift wrapping over few points)
    from shapely.geometry import MultiPoint
    hull = MultiPoint(verts).convex_hull
    return np.asarray(hull.exterior.coords)[:-1]
