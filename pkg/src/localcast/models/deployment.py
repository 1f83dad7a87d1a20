from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from src.localcast.core.exceptions import ScenarioError


class Deployment:
    """
    Geometric index over a scenario's node positions.

    Built once per scenario; read-only afterwards, so it can be shared by
    parallel trial workers. Region queries use closed balls (distance <= radius).
    """

    def __init__(self, ids: Sequence[int], positions: Sequence[Tuple[float, float]]):
        self.ids: Tuple[int, ...] = tuple(ids)
        self.index: Dict[int, int] = {node_id: i for i, node_id in enumerate(self.ids)}
        self.positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
        self.tree = cKDTree(self.positions) if len(self.ids) else None
        self._region_cache: Dict[float, List[List[int]]] = {}

    def __len__(self) -> int:
        return len(self.ids)

    def index_of(self, node_id: int) -> int:
        try:
            return self.index[node_id]
        except KeyError:
            raise ScenarioError(f"Unknown node id: {node_id}")

    def neighbours(self, i: int, radius: float) -> List[int]:
        """Indices within radius of node index i, excluding i itself."""
        if self.tree is None:
            return []
        members = self.tree.query_ball_point(self.positions[i], r=radius)
        return sorted(j for j in members if j != i)

    def regions(self, radius: float) -> List[List[int]]:
        """Closed-ball membership lists (self included) for every node, cached per radius."""
        if radius not in self._region_cache:
            if self.tree is None:
                self._region_cache[radius] = []
            else:
                balls = self.tree.query_ball_point(self.positions, r=radius)
                self._region_cache[radius] = [sorted(ball) for ball in balls]
        return self._region_cache[radius]

    def region_matrix(self, radius: float) -> sparse.csr_matrix:
        """Sparse 0/1 matrix M with M[x, y] = 1 iff y lies in the closed ball around x."""
        balls = self.regions(radius)
        rows = np.repeat(np.arange(len(balls)), [len(b) for b in balls])
        cols = np.fromiter((j for b in balls for j in b), dtype=np.int64, count=len(rows))
        data = np.ones(len(rows), dtype=np.float64)
        return sparse.csr_matrix((data, (rows, cols)), shape=(len(self), len(self)))
