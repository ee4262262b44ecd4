from pydantic import BaseModel, Field
from typing import Any, Dict, List, Literal, Optional

# Mixer schemas
class MixerReport(BaseModel):
    set_mask: str  # hex bitmask over [n]
    size: int
    distinct_sums: int
    epsilon: float

# Cover schemas
class SparsityReport(BaseModel):
    d: int
    p: int
    q: int
    x: int
    certificates: int
    measured: float
    analytic_bound: float
    floor: Optional[float] = None
    valid: Optional[bool] = None

# Result schemas
class ResultRecord(BaseModel):
    algorithm: str
    seed: int
    preset: str
    n: int
    target: int
    answer: bool
    witness: Optional[List[int]] = None
    achieved_sum: Optional[int] = None
    branch: Optional[str] = None
    mixers: List[MixerReport] = []
    primes: Dict[str, int] = {}
    residues: Dict[str, int] = {}
    list_sizes: Dict[str, int] = {}
    peak_payload: int = 0
    counters: Dict[str, int] = {}
    wall_time_s: Optional[float] = None

    def to_text(self) -> str:
        lines = [
            f"algorithm: {self.algorithm}",
            f"seed: {self.seed}",
            f"preset: {self.preset}",
            f"n: {self.n}",
            f"target: {self.target}",
            f"answer: {'YES' if self.answer else 'NO'}",
        ]
        if self.answer:
            lines.append(f"witness: {' '.join(str(i) for i in self.witness or [])}")
            lines.append(f"sum: {self.achieved_sum}")
        lines.append(f"branch: {self.branch or '-'}")
        for mixer in self.mixers:
            lines.append(f"mixer: mask={mixer.set_mask} size={mixer.size} "
                         f"distinct_sums={mixer.distinct_sums} epsilon={mixer.epsilon:.6f}")
        for name in ("primes", "residues", "list_sizes", "counters"):
            values = getattr(self, name)
            if values:
                lines.append(f"{name}: " + " ".join(f"{k}={values[k]}" for k in sorted(values)))
        lines.append(f"peak_payload: {self.peak_payload}")
        if self.wall_time_s is not None:
            lines.append(f"wall_time_s: {self.wall_time_s:.6f}")
        return "\n".join(lines) + "\n"

    def flat(self) -> Dict[str, Any]:
        """Single-row view for CSV output"""
        row = {
            "algorithm": self.algorithm, "seed": self.seed, "preset": self.preset,
            "n": self.n, "target": self.target, "answer": int(self.answer),
            "witness": " ".join(str(i) for i in self.witness or []),
            "achieved_sum": "" if self.achieved_sum is None else self.achieved_sum,
            "branch": self.branch or "", "peak_payload": self.peak_payload,
        }
        for name in ("primes", "residues", "list_sizes"):
            for key, value in sorted(getattr(self, name).items()):
                row[f"{name}.{key}"] = value
        if self.wall_time_s is not None:
            row["wall_time_s"] = round(self.wall_time_s, 6)
        return row

# Experiment schemas
class ExperimentConfig(BaseModel):
    algorithm: Literal["bruteforce", "mitm", "ss", "rep", "rep-p4", "rep-single", "budget"] = "rep"
    seed: int = Field(default=0, ge=0)
    trials: int = Field(default=10, ge=1)
    preset: str = "desk"
    n: int = Field(default=16, ge=1, le=60)
    bit_width: int = Field(default=20, ge=1, le=62)
    kind: Literal["uniform", "planted", "powers", "low-mixing"] = "planted"
    budget: Optional[float] = Field(default=None, gt=0)  # log2 of the entry budget; None means n/8
    overrides: Dict[str, Any] = {}
    output_format: Literal["text", "json", "csv"] = "text"
    timing: bool = False

class ExperimentReport(BaseModel):
    suite: str
    seed: int
    preset: str
    rows: List[Dict[str, Any]]
    summary: Dict[str, Any]
