"""
Experiment manifest: a TOML file with [graph], [queries], [train], [run]
sections and one [[methods]] table per benchmark arm.
"""

import logging
import os
from typing import List, Literal, Optional, Union

import toml
from pydantic import BaseModel, Field, ValidationError, field_validator

from utils.errors import ManifestError
from utils.io import fingerprint_mapping

logger = logging.getLogger(__name__)

METHOD_NAMES = (
    "zero", "alt", "fps", "first_m", "random_subset", "greedy_max", "fps_rr",
    "aac", "cdh", "cdh_sub", "cdh_sub_bpmx", "hybrid",
)


class GraphSection(BaseModel):
    source: str
    seed: int = 42
    w_lo: float = 1.0
    w_hi: float = 10.0


class QuerySection(BaseModel):
    count: int = Field(100, gt=0)
    mode: Literal["uniform", "hotspot", "powerlaw"] = "uniform"
    query_seed: Optional[int] = None
    validation_count: int = Field(100, gt=0)


class TrainSection(BaseModel):
    """Overrides on top of the configured training defaults"""
    learning_rate: Optional[float] = None
    epochs: Optional[int] = Field(None, ge=0)
    batch_size: Optional[int] = Field(None, gt=0)
    queries_per_epoch: Optional[int] = Field(None, gt=0)
    lambda_cond: Optional[float] = Field(None, ge=0)
    lambda_uniq: Optional[float] = Field(None, ge=0)
    lambda_cov: Optional[float] = Field(None, ge=0)
    cov_beta: Optional[float] = Field(None, gt=0)
    tau_start: Optional[float] = None
    tau_end: Optional[float] = None
    init: Optional[Literal["block_sparse", "identity_first_m"]] = None


class RunSection(BaseModel):
    budgets: List[int]
    seeds: List[int]
    output_dir: str = "results"
    jobs: int = Field(1, ge=1)
    label_dtype: Literal["float32", "float64"] = "float32"

    @field_validator("seeds", "budgets")
    @classmethod
    def _nonempty(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("must list at least one value")
        return value


class MethodSpec(BaseModel):
    """One benchmark arm with optional per-method overrides"""
    name: Literal[METHOD_NAMES]
    label: Optional[str] = None
    k0: Optional[int] = Field(None, gt=0)
    init: Optional[Literal["block_sparse", "identity_first_m"]] = None
    epochs: Optional[int] = Field(None, ge=0)
    lambda_cov: Optional[float] = Field(None, ge=0)
    restarts: Optional[int] = Field(None, ge=1)

    @property
    def display_name(self) -> str:
        return self.label or self.name


class ExperimentManifest(BaseModel):
    graph: GraphSection
    queries: QuerySection = QuerySection()
    train: TrainSection = TrainSection()
    run: RunSection
    methods: List[MethodSpec]

    @field_validator("methods")
    @classmethod
    def _methods_nonempty(cls, value: List[MethodSpec]) -> List[MethodSpec]:
        if not value:
            raise ValueError("manifest lists no methods")
        labels = [m.display_name for m in value]
        if len(set(labels)) != len(labels):
            raise ValueError(f"method labels must be unique, got {labels}")
        return value

    @property
    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON dump"""
        return fingerprint_mapping(self.model_dump(mode="json"))

    @classmethod
    def from_text(cls, text: str) -> "ExperimentManifest":
        try:
            return cls.model_validate(toml.loads(text))
        except toml.TomlDecodeError as e:
            raise ManifestError(f"manifest is not valid TOML: {e}")
        except ValidationError as e:
            raise ManifestError(f"invalid manifest: {e}")

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "ExperimentManifest":
        """Read and validate a manifest file"""
        with open(path, "r") as handle:
            manifest = cls.from_text(handle.read())
        logger.info(f"Loaded manifest {path} ({len(manifest.methods)} method(s), "
                    f"{len(manifest.run.seeds)} seed(s))")
        return manifest

    def dump(self) -> str:
        return toml.dumps(self.model_dump(mode="json", exclude_none=True))
