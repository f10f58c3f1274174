import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union


class PoolMethod(str, Enum):
    """How a landmark pool was chosen"""
    FPS = "fps"
    FPS_RANDOM_RESTART = "fps_random_restart"
    RANDOM_SUBSET = "random_subset"
    GREEDY_MAX = "greedy_max"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class LandmarkPool:
    """Ordered landmark sequence with provenance"""
    landmark_ids: Tuple[int, ...]
    method: PoolMethod = PoolMethod.EXPLICIT
    start_vertex: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        ids = tuple(int(v) for v in self.landmark_ids)
        if len(set(ids)) != len(ids):
            raise ValueError("landmark ids must be distinct")
        object.__setattr__(self, "landmark_ids", ids)
        object.__setattr__(self, "method", PoolMethod(self.method))

    def __len__(self) -> int:
        return len(self.landmark_ids)

    @classmethod
    def explicit(cls, ids: Sequence[int]) -> "LandmarkPool":
        """Pool from a caller-supplied vertex list"""
        return cls(tuple(ids), PoolMethod.EXPLICIT)

    def prefix(self, k: int) -> "LandmarkPool":
        """First k landmarks, same provenance"""
        if not 1 <= k <= len(self):
            raise ValueError(f"prefix length {k} outside [1, {len(self)}]")
        return LandmarkPool(self.landmark_ids[:k], self.method, self.start_vertex, self.seed)


def save_pool(pool: LandmarkPool, path: Union[str, os.PathLike], header_lines: Sequence[str] = ()) -> Path:
    """One landmark id per line under a provenance header"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        for line in header_lines:
            handle.write(line.rstrip("\n") + "\n")
        handle.write(f"# method={pool.method.value} start_vertex={pool.start_vertex} seed={pool.seed}\n")
        for vertex in pool.landmark_ids:
            handle.write(f"{vertex}\n")
    return path


def load_pool(path: Union[str, os.PathLike]) -> LandmarkPool:
    """Read a pool written by save_pool"""
    method, start, seed = PoolMethod.EXPLICIT, None, None
    ids = []
    with open(path, "r") as handle:
        for raw in handle:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("# method="):
                fields = dict(token.split("=", 1) for token in line[1:].split())
                method = PoolMethod(fields["method"])
                start = None if fields.get("start_vertex") in (None, "None") else int(fields["start_vertex"])
                seed = None if fields.get("seed") in (None, "None") else int(fields["seed"])
            elif not line.startswith("#"):
                ids.append(int(line))
    return LandmarkPool(tuple(ids), method, start, seed)
