from dataclasses import dataclass

from utils.errors import BudgetError

FLOAT_BYTES = 4
CDH_ENTRY_BYTES = 9


@dataclass(frozen=True)
class BudgetSpec:
    """Matched-memory budget in deployed bytes per vertex (float32 labels)"""
    bytes_per_vertex: int
    graph_directed: bool = False

    def __post_init__(self):
        if self.bytes_per_vertex <= 0 or self.bytes_per_vertex % FLOAT_BYTES:
            raise BudgetError(f"budget B={self.bytes_per_vertex} must be a positive multiple of {FLOAT_BYTES}")
        for name in ("aac_m", "alt_k"):
            if getattr(self, name) < 1:
                raise BudgetError(f"budget B={self.bytes_per_vertex} gives {name}=0 "
                                  f"({'directed' if self.graph_directed else 'undirected'} graph)")

    @property
    def aac_m(self) -> int:
        """Compressed floats per vertex (split fwd/bwd when directed)"""
        return self.bytes_per_vertex // FLOAT_BYTES

    @property
    def alt_k(self) -> int:
        """ALT landmarks; directed ALT stores two floats per landmark"""
        per_landmark = 2 * FLOAT_BYTES if self.graph_directed else FLOAT_BYTES
        return self.bytes_per_vertex // per_landmark

    @property
    def cdh_r(self) -> int:
        """Retained CDH entries per vertex at 4 + 4 + 1 bytes each"""
        r = self.bytes_per_vertex // CDH_ENTRY_BYTES
        if r < 1:
            raise BudgetError(f"budget B={self.bytes_per_vertex} is below one CDH entry ({CDH_ENTRY_BYTES} bytes)")
        return r

    def half(self) -> "BudgetSpec":
        """Half the budget, for the AAC + ALT hybrid"""
        if self.bytes_per_vertex % (2 * FLOAT_BYTES):
            raise BudgetError(f"hybrid needs B divisible by {2 * FLOAT_BYTES}, got {self.bytes_per_vertex}")
        return BudgetSpec(self.bytes_per_vertex // 2, self.graph_directed)
