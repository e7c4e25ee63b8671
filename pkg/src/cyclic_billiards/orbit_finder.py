"""Multistart search for periodic billiard trajectories.

Closed n-periodic trajectories are the critical points of L on the cyclic
configuration space, so the search solves grad L = 0 on the product of
surfaces. Each start runs a damped Newton (Levenberg-Marquardt) iteration on
the tangential gradient, using the analytic Riemannian Hessian and
re-projecting onto the surface after every step. Newton-type steps converge
to critical points of any Morse index, which plain minimization of L would
miss.

All starts are advanced together as one numpy batch. Every operation acts
row-wise, so the outcome of a start depends only on its own random substream.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import billiard_core as bc
from .billiard_core import CyclicConfiguration, ProjectionError


@dataclass(frozen=True)
class SearchSettings:
    starts: int = 2000
    max_iterations: int = 200
    gradient_tolerance: float = 1e-10
    residual_tolerance: float = 1e-8
    dedupe_tolerance: float = 1e-6
    rng_seed: int = 0
    min_edge_floor: float | None = None   # defaults to 1e-3 * body scale
    threads: int = 1
    chunk_size: int = 4096
    compute_morse: bool = True
    hessian_step: float | None = None

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("gradient_tolerance", "residual_tolerance", "dedupe_tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.min_edge_floor is not None and not self.min_edge_floor > 0:
            raise ValueError("min_edge_floor must be positive")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")
        if self.threads < 1 or self.chunk_size < 1:
            raise ValueError("threads and chunk_size must be >= 1")

    def edge_floor(self, body) -> float:
        return 1e-3 * body.scale if self.min_edge_floor is None else self.min_edge_floor


@dataclass
class OrbitRecord:
    configuration: CyclicConfiguration
    length_value: float
    residual: float
    gradient_norm: float
    morse_index: int | None
    nullity: int | None
    rotation_number: int | None
    canonical_signature: tuple
    cover_factor: int
    start: int
    hits: int = 1

    @property
    def is_multiple_cover(self) -> bool:
        return self.cover_factor > 1

    def as_dict(self) -> dict:
        d = asdict(self)
        d["configuration"] = self.configuration.points.tolist()
        d["canonical_signature"] = list(self.canonical_signature)
        d["is_multiple_cover"] = self.is_multiple_cover
        return d


@dataclass
class FinderDiagnostics:
    starts: int = 0
    converged: int = 0
    accepted: int = 0
    collapsed: int = 0
    stalled: int = 0
    max_iterations: int = 0
    rejected: int = 0
    projection_failures: int = 0
    distinct: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


# outcome codes per start
_RUNNING, _CONVERGED, _COLLAPSED, _STALLED, _MAXITER, _PROJFAIL = range(6)


# -- initialization ----------------------------------------------------------

def _start_streams(seed: int, starts: int):
    # spawned children depend only on (seed, child index): more starts only append
    return np.random.SeedSequence(seed).spawn(starts)


def _axes(body):
    return getattr(body, "axes", np.full(body.ambient_dim, body.scale))


def random_configuration(body, n: int, rng: np.random.Generator, floor: float,
                         max_tries: int = 100) -> np.ndarray:
    """Surface points from ellipsoid-scaled Gaussian directions, rejecting
    samples with an edge shorter than ``floor``."""
    axes = _axes(body)
    for _ in range(max_tries):
        z = rng.standard_normal((n, body.ambient_dim)) * axes
        x = body.project(z)
        if np.min(np.linalg.norm(np.roll(x, -1, axis=0) - x, axis=1)) >= floor:
            return x
    raise RuntimeError("could not sample a configuration away from the singular set")


def _project_rows(body, y):
    try:
        return body.project(y), np.ones(y.shape[0], dtype=bool)
    except ProjectionError:
        out = np.array(y)
        ok = np.ones(y.shape[0], dtype=bool)
        for k in range(y.shape[0]):
            try:
                out[k] = body.project(y[k])
            except ProjectionError:
                ok[k] = False
        return out, ok


# -- the batched solver --------------------------------------------------------

def _gradient_norm(body, x):
    g = bc._tangent_part(body, x, bc._ambient_length_gradient(x))
    return np.sqrt(np.sum(g * g, axis=(-2, -1)))


def _min_edges(x):
    return np.min(np.linalg.norm(np.roll(x, -1, axis=-2) - x, axis=-1), axis=-1)


def solve_batch(body, x0, settings: SearchSettings, floor: float):
    """Run damped Newton on every configuration of ``x0`` (shape (B, n, d)).

    Returns final points and per-start outcome codes.
    """
    x = np.array(x0, dtype=float)
    B, n, d = x.shape
    m = d - 1
    status = np.full(B, _RUNNING)
    mu = np.full(B, 1e-2)
    gnorm = _gradient_norm(body, x)
    step_cap = 0.25 * body.scale
    # polish well below the acceptance threshold; a start that stalls after
    # reaching the threshold still counts as converged
    target = settings.gradient_tolerance * 1e-4
    status[gnorm <= target] = _CONVERGED

    for _ in range(settings.max_iterations):
        act = np.flatnonzero(status == _RUNNING)
        if act.size == 0:
            break
        xa = x[act]
        frames = bc._tangent_frames(body, xa)
        g = bc.reduced_gradient(body, xa, frames)
        H = bc.riemannian_hessian(body, xa, frames)
        w, V = np.linalg.eigh(H)
        c = np.einsum("bji,bj->bi", V, g)
        ma = mu[act][:, None]
        s = -np.einsum("bij,bj->bi", V, w * c / (w * w + ma))
        step = np.einsum("bnij,bnj->bni", frames, s.reshape(-1, n, m))
        size = np.max(np.linalg.norm(step, axis=-1), axis=-1)
        step *= np.minimum(1.0, step_cap / np.maximum(size, 1e-300))[:, None, None]

        trial, ok = _project_rows(body, xa + step)
        edges = _min_edges(trial)
        valid = ok & (edges > 0)
        tnorm = _gradient_norm(body, np.where(valid[:, None, None], trial, xa))
        tnorm[~valid] = np.inf
        better = tnorm < gnorm[act]

        acc = act[better]
        x[acc] = trial[better]
        gnorm[acc] = tnorm[better]
        mu[acc] = np.maximum(mu[acc] / 3.0, 1e-12)
        mu[act[~better]] *= 4.0

        status[act[~ok]] = _PROJFAIL
        status[acc[gnorm[acc] <= target]] = _CONVERGED
        status[acc[(edges[better] < floor) & (status[acc] == _RUNNING)]] = _COLLAPSED
        stall = act[(mu[act] > 1e12) & (status[act] == _RUNNING)]
        status[stall] = np.where(gnorm[stall] <= settings.gradient_tolerance, _CONVERGED, _STALLED)
    left = status == _RUNNING
    status[left] = np.where(gnorm[left] <= settings.gradient_tolerance, _CONVERGED, _MAXITER)
    return x, status


# -- signatures and dedupe ---------------------------------------------------

def _quantize(v, tol):
    return tuple(int(q) for q in np.rint(np.asarray(v, dtype=float).ravel() / tol))


def _sphere_invariant(points):
    l = np.sort(np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1))
    return np.append(l, math.fsum(l))


def canonicalize(config, dedupe_tolerance: float = 1e-6, round_body: bool = False) -> tuple:
    """D_n-invariant key, quantized at ``dedupe_tolerance``.

    On a round sphere (``round_body=True``) the key is built from rotation
    invariant data, the sorted edge lengths and the perimeter, so a whole
    family of rotated orbits shares one key. Otherwise it is the
    lexicographically least quantized coordinate array among the 2n
    dihedral re-indexings.
    """
    pts = bc._points(config)
    if round_body:
        return ("sphere",) + _quantize(_sphere_invariant(pts), dedupe_tolerance)
    images = [_quantize(img, dedupe_tolerance) for img in bc.dihedral_images(pts)]
    return ("dihedral",) + min(images)


def _cluster(vectors, image_sets, tol):
    """Greedy clustering in input order.

    ``vectors[k]`` is compared, in the sup norm, with every stored image of
    the earlier representatives. Returns the representative of each item.
    """
    if not vectors:
        return []
    all_images = np.concatenate([np.asarray(s) for s in image_sets])
    owner = np.concatenate([np.full(len(s), k) for k, s in enumerate(image_sets)])
    tree = cKDTree(all_images)
    rep_of = np.full(len(vectors), -1)
    is_rep = np.zeros(len(vectors), dtype=bool)
    for k, v in enumerate(vectors):
        near = owner[tree.query_ball_point(v, r=tol, p=np.inf)]
        earlier = near[(near < k) & is_rep[near]]
        if earlier.size:
            rep_of[k] = rep_of[earlier.min()]
        else:
            rep_of[k] = k
            is_rep[k] = True
    return rep_of.tolist()


def _dedupe_inputs(points_list, round_body):
    vectors, images = [], []
    for pts in points_list:
        if round_body:
            v = _sphere_invariant(pts)
            vectors.append(v)
            images.append([v])
        else:
            vectors.append(pts.ravel())
            images.append([img.ravel() for img in bc.dihedral_images(pts)])
    return vectors, images


def dedupe(points_list, tol, round_body=False):
    """Indices of representatives (in input order) and the cluster of each item."""
    vectors, images = _dedupe_inputs(points_list, round_body)
    rep_of = _cluster(vectors, images, tol)
    reps = [k for k, r in enumerate(rep_of) if r == k]
    return reps, rep_of


# -- per-orbit analysis --------------------------------------------------------

def classify_spectrum(eigenvalues) -> tuple[int, int]:
    ev = np.asarray(eigenvalues, dtype=float)
    tau = max(1e-6, 1e-6 * float(np.max(np.abs(ev))))
    return int(np.sum(ev < -tau)), int(np.sum(np.abs(ev) <= tau))


def morse_data(body, orbit, step: float | None = None) -> tuple[int, int]:
    """(index, nullity) from the eigenvalues of the finite-difference Hessian."""
    pts = orbit.configuration if isinstance(orbit, OrbitRecord) else orbit
    H = bc.hessian_in_chart(body, pts, step=step)
    return classify_spectrum(np.linalg.eigvalsh(H))


def rotation_number(orbit, planarity_tolerance: float = 1e-8) -> int | None:
    """Winding number of a planar orbit around its centroid, or None.

    None is returned for non-planar orbits, for collinear ones (n = 2
    diameters), and when the winding is not within 0.1 of an integer.
    """
    pts = bc._points(orbit.configuration if isinstance(orbit, OrbitRecord) else orbit)
    c = pts - pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(c, full_matrices=False)
    tol = planarity_tolerance * max(1.0, sv[0])
    if np.any(sv[2:] > tol) or len(sv) < 2 or sv[1] <= tol:
        return None
    planar = c @ vt[:2].T
    ang = np.arctan2(planar[:, 1], planar[:, 0])
    turn = np.diff(np.append(ang, ang[0]))
    turn = (turn + np.pi) % (2 * np.pi) - np.pi
    w = abs(float(np.sum(turn)) / (2 * np.pi))
    k = round(w)
    return int(k) if abs(w - k) < 0.1 else None


def detect_multiple_cover(orbit, tolerance: float = 1e-6) -> int:
    """Largest k | n such that shifting indices by n/k fixes the configuration."""
    pts = bc._points(orbit.configuration if isinstance(orbit, OrbitRecord) else orbit)
    n = pts.shape[0]
    for k in range(n, 1, -1):
        if n % k == 0 and np.max(np.abs(np.roll(pts, -(n // k), axis=0) - pts)) <= tolerance:
            return k
    return 1


def make_record(body, points, settings: SearchSettings, start: int = -1, hits: int = 1) -> OrbitRecord:
    cfg = CyclicConfiguration(points)
    round_body = bool(body.is_round)
    if settings.compute_morse:
        index, nullity = morse_data(body, cfg, settings.hessian_step)
    else:
        index = nullity = None
    g = bc.tangential_gradient(body, cfg)
    return OrbitRecord(
        configuration=cfg,
        length_value=bc.length(cfg),
        residual=bc.reflection_residual(body, cfg),
        gradient_norm=float(np.linalg.norm(g)),
        morse_index=index,
        nullity=nullity,
        rotation_number=rotation_number(cfg),
        canonical_signature=canonicalize(cfg, settings.dedupe_tolerance, round_body),
        cover_factor=detect_multiple_cover(cfg, settings.dedupe_tolerance),
        start=start,
        hits=hits,
    )


# -- driver ------------------------------------------------------------------

def _run_chunk(body, n, settings, floor, streams):
    x0 = np.stack([random_configuration(body, n, np.random.default_rng(s), floor) for s in streams])
    return solve_batch(body, x0, settings, floor)


def find_orbits(body, n: int, settings: SearchSettings | None = None,
                diagnostics: FinderDiagnostics | None = None) -> list[OrbitRecord]:
    """Multistart search; returns D_n-deduplicated orbits in order of first discovery.

    Per-start outcomes are tallied into ``diagnostics`` when one is passed.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    settings = settings or SearchSettings()
    diag = diagnostics if diagnostics is not None else FinderDiagnostics()
    floor = settings.edge_floor(body)
    streams = _start_streams(settings.rng_seed, settings.starts)
    chunks = [streams[i:i + settings.chunk_size] for i in range(0, len(streams), settings.chunk_size)]
    if settings.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(settings.threads) as pool:
            results = list(pool.map(lambda ch: _run_chunk(body, n, settings, floor, ch), chunks))
    else:
        results = [_run_chunk(body, n, settings, floor, ch) for ch in chunks]
    x = np.concatenate([r[0] for r in results])
    status = np.concatenate([r[1] for r in results])

    diag.starts += settings.starts
    diag.converged += int(np.sum(status == _CONVERGED))
    diag.collapsed += int(np.sum(status == _COLLAPSED))
    diag.stalled += int(np.sum(status == _STALLED))
    diag.max_iterations += int(np.sum(status == _MAXITER))
    diag.projection_failures += int(np.sum(status == _PROJFAIL))

    good = []
    for k in np.flatnonzero(status == _CONVERGED):
        pts = x[k]
        if (_min_edges(pts) >= floor and bc.reflection_residual(body, pts) <= settings.residual_tolerance
                and _gradient_norm(body, pts) <= settings.gradient_tolerance):
            good.append(int(k))
        else:
            diag.rejected += 1
    diag.accepted += len(good)

    round_body = bool(body.is_round)
    reps, rep_of = dedupe([x[k] for k in good], settings.dedupe_tolerance, round_body)
    hits = np.bincount(rep_of, minlength=len(good)) if good else []
    records = [make_record(body, x[good[j]], settings, start=good[j], hits=int(hits[j])) for j in reps]
    diag.distinct += len(records)
    return records


@dataclass
class FamilySummary:
    length: float
    morse_index: int | None
    nullity: int | None
    rotation_number: int | None
    cover_factor: int
    members: int


@dataclass
class OrbitCount:
    count: int
    families: list = field(default_factory=list)


def count_distinct_orbits(records, dedupe_tolerance: float = 1e-6) -> OrbitCount:
    """Number of distinct canonical signatures, with one summary row per family,
    sorted by critical value. Multiple covers count."""
    groups: dict[tuple, list[OrbitRecord]] = {}
    for rec in records:
        groups.setdefault(rec.canonical_signature, []).append(rec)
    fams = [FamilySummary(g[0].length_value, g[0].morse_index, g[0].nullity,
                          g[0].rotation_number, g[0].cover_factor, sum(r.hits for r in g))
            for g in groups.values()]
    fams.sort(key=lambda f: f.length)
    return OrbitCount(len(groups), fams)
