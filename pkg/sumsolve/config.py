from typing import Dict, Optional

from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import BaseSettings

from sumsolve.errors import UsageError


class Settings(BaseSettings):
    PRESET: str = "desk"
    SEED: int = 0
    LOG_LEVEL: str = "info"
    DATABASE_URL: Optional[str] = None
    OTLP_ENDPOINT: Optional[str] = None
    TRACE_CONSOLE: bool = False
    SERVICE_NAME: str = "sumsolve"
    METRICS_FILE: Optional[str] = None
    MAX_BRUTEFORCE_N: int = 26
    MAX_MITM_N: int = 40
    MAX_SS_N: int = 48

    class Config:
        env_file = ".env"
        env_prefix = "SUMSOLVE_"


settings = Settings()


# ========================================
# CONSTANT PRESETS
# ========================================

class Preset(BaseModel):
    """Solver constants. `paper` holds the asymptotic values, `desk` the ones
    that make the branches fire at n <= 40."""

    name: str
    mu: float = Field(gt=0, le=1 / 3)
    lambda0: float = Field(gt=0, le=0.5)
    eps0: float = Field(gt=0, le=1)
    slack: float = Field(default=0.02, ge=0)
    ov_blocks: int = Field(default=1, ge=1)
    crossover: int = Field(default=2 ** 10, ge=0)
    cross_product_cap: int = Field(default=2 ** 22, ge=1)
    repetitions: int = Field(default=100, ge=1)
    small_lambda_trials: Optional[int] = Field(default=None, ge=1)
    afford_multiplier: float = Field(default=4.0, gt=0)
    table_budget: int = Field(default=2 ** 24, ge=1)
    ov_trials: int = Field(default=3, ge=1)
    space_gamma: float = Field(default=0.249999, gt=0, lt=1)

    def trials_for(self, n: int) -> int:
        """Small-lambda trial count, 10*n^2 unless overridden"""
        return self.small_lambda_trials or 10 * n * n


PRESETS: Dict[str, Preset] = {
    "paper": Preset(name="paper", mu=0.217, lambda0=0.495, eps0=0.00002, ov_blocks=20),
    "desk": Preset(name="desk", mu=0.2, lambda0=0.3, eps0=0.15),
}


def get_preset(name: Optional[str] = None, **overrides) -> Preset:
    """Return a validated copy of a named preset with overrides applied"""
    name = name or settings.PRESET
    if name not in PRESETS:
        raise UsageError(f"Unknown preset '{name}' (choose from {', '.join(sorted(PRESETS))})")
    data = PRESETS[name].model_dump()
    unknown = set(overrides) - set(data)
    if unknown:
        raise UsageError(f"Unknown constant(s): {', '.join(sorted(unknown))}")
    data.update(overrides)
    try:
        return Preset.model_validate(data)
    except ValidationError as e:
        raise UsageError(f"Invalid override for preset '{name}': {e}")
