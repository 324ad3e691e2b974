"""
ISL grid and minimum-hop routing.

Each satellite links to its two ring neighbours in the same plane (FSO) and
to the same slot in the two adjacent planes (RF), giving an M x N torus. The
seam between the last and first plane is an ordinary edge.

Routing picks, among all paths with the fewest hops, the one with the
smallest summed Euclidean hop length. Because the torus is translation
invariant, the min-hop predecessors of every node relative to a source are
computed once per grid and reused for every query; the distance pass then
visits nodes in order of hop count.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .errors import TopologyError
from .orbits import Constellation, SatelliteId, elevation_angles

INTRA = "intra"
INTER = "inter"
DOWNLINK = "downlink"

# neighbour directions: slot-1, slot+1, plane-1, plane+1
_DIRECTIONS = ((0, -1), (0, 1), (-1, 0), (1, 0))


def ring_distance(a, b, n):
    d = np.abs(np.asarray(a) - np.asarray(b)) % n
    return np.minimum(d, n - d)


@dataclass
class RoutePath:
    nodes: list[SatelliteId]
    hop_distances: list[float]
    hop_classes: list[str]
    downlink_km: float | None = None

    @property
    def hops(self) -> int:
        return len(self.hop_distances)

    @property
    def total_distance(self) -> float:
        return float(sum(self.hop_distances))

    def legs(self) -> list[tuple[str, float]]:
        """(link class, distance) for every traversal, downlink last."""
        out = list(zip(self.hop_classes, self.hop_distances))
        if self.downlink_km is not None:
            out.append((DOWNLINK, self.downlink_km))
        return out


@dataclass
class TorusGrid:
    """Index bookkeeping for the M x N ISL torus.

    Edges are numbered ``p*N + s`` for the intra-plane edge (p,s)-(p,s+1) and
    ``M*N + p*N + s`` for the inter-plane edge (p,s)-(p+1,s).
    """

    planes: int
    sats_per_plane: int

    @classmethod
    def for_constellation(cls, constellation: Constellation) -> "TorusGrid":
        return cls(constellation.spec.planes, constellation.spec.sats_per_plane)

    @property
    def size(self) -> int:
        return self.planes * self.sats_per_plane

    def index(self, plane: int, slot: int) -> int:
        return (plane % self.planes) * self.sats_per_plane + slot % self.sats_per_plane

    def sat_id(self, index: int) -> SatelliteId:
        return SatelliteId(*divmod(int(index), self.sats_per_plane))

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """(S, 4) neighbour indices in direction order slot-1, slot+1, plane-1, plane+1."""
        m, n = self.planes, self.sats_per_plane
        p, s = np.divmod(np.arange(m * n), n)
        cols = [((p + dp) % m) * n + (s + ds) % n for dp, ds in _DIRECTIONS]
        return np.stack(cols, axis=1)

    @cached_property
    def edge_table(self) -> np.ndarray:
        """(S, 4) edge index used to reach each neighbour."""
        m, n = self.planes, self.sats_per_plane
        mn = m * n
        p, s = np.divmod(np.arange(mn), n)
        return np.stack(
            [
                p * n + (s - 1) % n,
                p * n + s,
                mn + ((p - 1) % m) * n + s,
                mn + p * n + s,
            ],
            axis=1,
        )

    @cached_property
    def edge_endpoints(self) -> np.ndarray:
        """(2*S, 2) endpoints of every edge, intra edges first."""
        m, n = self.planes, self.sats_per_plane
        idx = np.arange(m * n)
        p, s = np.divmod(idx, n)
        intra = np.stack([idx, p * n + (s + 1) % n], axis=1)
        inter = np.stack([idx, ((p + 1) % m) * n + s], axis=1)
        return np.concatenate([intra, inter])

    def edge_class(self, edge: int) -> str:
        return INTRA if edge < self.size else INTER

    def edge_lengths(self, positions: np.ndarray) -> np.ndarray:
        """Euclidean length of every edge; ``positions`` is (..., S, 3)."""
        a, b = self.edge_endpoints[:, 0], self.edge_endpoints[:, 1]
        diff = positions[..., a, :] - positions[..., b, :]
        return np.sqrt(np.einsum("...i,...i->...", diff, diff))

    def neighbors(self, index: int) -> list[int]:
        if self.planes < 3 or self.sats_per_plane < 3:
            raise TopologyError(
                f"a {self.planes}x{self.sats_per_plane} grid has duplicate neighbours; "
                "need at least 3 planes and 3 satellites per plane"
            )
        return [int(k) for k in self.neighbor_table[index]]

    def hop_distance(self, a, b):
        pa, sa = np.divmod(np.asarray(a), self.sats_per_plane)
        pb, sb = np.divmod(np.asarray(b), self.sats_per_plane)
        return ring_distance(pa, pb, self.planes) + ring_distance(sa, sb, self.sats_per_plane)

    @cached_property
    def _relative_order(self):
        """Nodes relative to an origin source, sorted by hop count.

        Returns (plane offset, slot offset, predecessor mask) for every node
        but the origin; a neighbour in direction d is a predecessor iff it is
        one hop closer to the origin.
        """
        m, n = self.planes, self.sats_per_plane
        rp, rs = np.divmod(np.arange(m * n), n)
        hops = ring_distance(rp, 0, m) + ring_distance(rs, 0, n)
        order = np.argsort(hops, kind="stable")[1:]
        mask = hops[self.neighbor_table[order]] == hops[order][:, None] - 1
        return rp[order].astype(np.int64), rs[order].astype(np.int64), mask

    def min_hop_distances(self, sources, lengths: np.ndarray) -> np.ndarray:
        """Shortest summed length over min-hop paths from each source to every node.

        ``lengths`` holds edge lengths, either (E,) shared or (B, E) per source.
        Returns (B, S).
        """
        sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        lengths = np.ascontiguousarray(
            np.broadcast_to(lengths, (sources.size, lengths.shape[-1])), dtype=float
        )
        rp, rs, mask = self._relative_order
        out = np.empty((sources.size, self.size))
        for b, src in enumerate(sources):
            _layered_min_distance(int(src), self.planes, self.sats_per_plane, rp, rs, mask,
                                  self.neighbor_table, self.edge_table, lengths[b], out[b])
        return out

    def hops_between(self, a: int, b: int) -> int:
        n, m = self.sats_per_plane, self.planes
        dp = abs(a // n - b // n) % m
        ds = abs(a % n - b % n) % n
        return min(dp, m - dp) + min(ds, n - ds)

    def route(self, src: int, dst: int, lengths: np.ndarray,
              cost_to_go: np.ndarray | None = None) -> tuple[list[int], list[int]]:
        """Node and edge index sequences of the routed path.

        Ties between equally long min-hop paths go to the lexicographically
        smallest satellite sequence. ``cost_to_go`` (distances from ``dst``)
        may be passed in when already computed.
        """
        if src == dst:
            return [src], []
        rp, rs, mask = self._relative_order
        m, n = self.planes, self.sats_per_plane
        if cost_to_go is None:
            cost_to_go = np.empty(self.size)
            _layered_min_distance(int(dst), m, n, rp, rs, mask, self.neighbor_table,
                                  self.edge_table, lengths, cost_to_go)
        hops = self.hops_between(src, dst)
        nodes = np.empty(hops + 1, dtype=np.int64)
        edges = np.empty(hops, dtype=np.int64)
        _greedy_walk(int(src), int(dst), m, n, self.neighbor_table, self.edge_table,
                     np.ascontiguousarray(lengths, dtype=float), cost_to_go, _TIE_TOL, nodes, edges)
        return nodes.tolist(), edges.tolist()


@njit(cache=True)
def _layered_min_distance(src, m, n, rp, rs, mask, nbr, edge, lengths, out):
    out[:] = np.inf
    out[src] = 0.0
    sp, ss = src // n, src % n
    for k in range(rp.size):
        v = ((sp + rp[k]) % m) * n + (ss + rs[k]) % n
        best = np.inf
        for d in range(4):
            if mask[k, d]:
                c = out[nbr[v, d]] + lengths[edge[v, d]]
                if c < best:
                    best = c
        out[v] = best


@njit(cache=True)
def _hops(a, b, m, n):
    dp = abs(a // n - b // n) % m
    ds = abs(a % n - b % n) % n
    return min(dp, m - dp) + min(ds, n - ds)


@njit(cache=True)
def _greedy_walk(src, dst, m, n, nbr, edge, lengths, cost_to_go, tie_tol, nodes, edges):
    """Follow cost-to-go from src; equal costs go to the smaller satellite index."""
    u = src
    nodes[0] = src
    remaining = _hops(src, dst, m, n)
    step = 0
    while remaining > 0:
        best_cost = np.inf
        best_w = -1
        best_e = -1
        for k in range(4):
            w = nbr[u, k]
            if _hops(w, dst, m, n) != remaining - 1:
                continue
            e = edge[u, k]
            cost = lengths[e] + cost_to_go[w]
            if best_w < 0:
                best_cost, best_w, best_e = cost, w, e
                continue
            tol = tie_tol * max(1.0, abs(best_cost))
            if cost < best_cost - tol or (abs(cost - best_cost) <= tol and w < best_w):
                best_cost, best_w, best_e = cost, w, e
        u = best_w
        step += 1
        nodes[step] = u
        edges[step - 1] = best_e
        remaining -= 1


_TIE_TOL = 1e-12


def neighbors(sat: SatelliteId, planes: int, sats_per_plane: int) -> list[SatelliteId]:
    grid = TorusGrid(planes, sats_per_plane)
    return [grid.sat_id(k) for k in grid.neighbors(grid.index(*sat))]


def min_hop_path(src: SatelliteId, dst: SatelliteId, positions: np.ndarray,
                 grid: TorusGrid) -> RoutePath:
    """Minimum-distance path among the minimum-hop paths from ``src`` to ``dst``.

    ``positions`` is the (S, 3) snapshot of all satellites (plane-major order).
    """
    lengths = grid.edge_lengths(positions)
    nodes, edges = grid.route(grid.index(*src), grid.index(*dst), lengths)
    return path_from_indices(grid, nodes, edges, lengths)


def path_from_indices(grid: TorusGrid, nodes, edges, lengths) -> RoutePath:
    return RoutePath(
        nodes=[grid.sat_id(k) for k in nodes],
        hop_distances=[float(lengths[e]) for e in edges],
        hop_classes=[grid.edge_class(e) for e in edges],
    )


@dataclass
class Gateway:
    index: int
    isl_distance_km: float
    slant_range_km: float

    @property
    def total_km(self) -> float:
        return self.isl_distance_km + self.slant_range_km


def select_gateway(source: int, positions: np.ndarray, gs_pos: np.ndarray,
                   min_elevation: float, grid: TorusGrid,
                   lengths: np.ndarray | None = None) -> Gateway | None:
    """Visible satellite minimising routed ISL distance plus slant range to the GS.

    Returns None when no satellite is at or above ``min_elevation``.
    """
    if not 0.0 <= min_elevation < 90.0:
        raise ValueError(f"min_elevation must be in [0, 90), got {min_elevation}")
    if lengths is None:
        lengths = grid.edge_lengths(positions)
    gateways = select_gateways(np.array([source]), positions[None], gs_pos, min_elevation,
                               grid, lengths[None])
    return gateways[0]


def select_gateways(sources: np.ndarray, positions: np.ndarray, gs_pos: np.ndarray,
                    min_elevation: float, grid: TorusGrid,
                    lengths: np.ndarray) -> list[Gateway | None]:
    """Batched gateway choice; ``positions`` (B, S, 3), ``gs_pos`` (B, 3) or (3,)."""
    gs_pos = np.broadcast_to(gs_pos, (len(sources), 3))
    elev = elevation_angles(gs_pos[:, None, :], positions)
    slant = np.linalg.norm(positions - gs_pos[:, None, :], axis=-1)
    visible = elev >= min_elevation
    out: list[Gateway | None] = [None] * len(sources)
    has = visible.any(axis=1)
    if not has.any():
        return out
    rows = np.flatnonzero(has)
    dist = grid.min_hop_distances(sources[rows], lengths[rows])
    total = np.where(visible[rows], dist + slant[rows], np.inf)
    best = total.argmin(axis=1)
    for j, (r, k) in enumerate(zip(rows, best)):
        out[r] = Gateway(int(k), float(dist[j, k]), float(slant[r, k]))
    return out


def adjacent_distance_bounds(constellation: Constellation, times) -> tuple[float, float]:
    """Min and max ISL length over all edges and the given sample times."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise ValueError("need at least one sample time")
    grid = TorusGrid.for_constellation(constellation)
    ends = grid.edge_endpoints
    keep = ends[:, 0] != ends[:, 1]
    if not keep.any():
        raise TopologyError("constellation has no inter-satellite links")
    d = grid.edge_lengths(constellation.positions(times))[..., keep]
    return float(d.min()), float(d.max())
