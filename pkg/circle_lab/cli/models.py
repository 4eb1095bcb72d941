"""
Experiment configuration for the circle-lab command line.

Pydantic models for config validation; one flat model serves every
subcommand and checks the fields its command needs.
"""
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from circle_lab.restriction import CoefficientRule, Variant
from circle_lab.surfaces import Family, Profile, SurfaceSystem, WeightProfile

# Fields each command cannot run without.
REQUIRED: Dict[str, Tuple[str, ...]] = {
    "weylsum": ("k", "N", "alpha"),
    "extension": ("family", "N", "alpha"),
    "gridsample": ("family", "N"),
    "arcs": ("k", "N", "Q", "alpha"),
    "mollifier": ("k", "N"),
    "majorant": ("k", "N", "p", "Q"),
    "repcount": ("family", "N", "s"),
    "hypk": ("k", "s", "X"),
    "vinogradov": ("k", "s", "N"),
    "divisor": ("Q", "X"),
    "gauss": ("k", "a", "b", "q"),
    "hua-scan": ("k", "qmax"),
    "singular": ("exponents", "p"),
    "moments": ("family", "N", "p"),
    "levelset": ("family", "N"),
    "truncated": ("family", "N", "p", "lambda_cut"),
    "tomas-stein": ("family", "N"),
    "decompose": ("family", "N"),
    "piece-check": ("family", "N", "Q", "shift"),
    "weyl-scan": ("k", "N_list"),
    "poisson-check": ("k", "N", "a", "q"),
    "scaling": ("family", "p", "N_list"),
    "levelset-fit": ("family", "N_list"),
    "exponents": ("family",),
}

COMMANDS = tuple(REQUIRED)


class ExperimentConfig(BaseModel):
    """Fully resolved configuration of one command run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str

    # Surface
    family: Optional[Family] = None
    k: Optional[int] = Field(default=None, ge=1)
    d: int = Field(default=1, ge=1)
    exponents: Optional[List[int]] = None
    profile: Profile = Profile.QUINTIC_PLATEAU

    # Scales
    N: Optional[int] = Field(default=None, ge=1)
    N_list: Optional[List[int]] = None

    # Points and exponents
    alpha: Optional[List[float]] = None
    theta: List[float] = Field(default_factory=lambda: [0.0])
    p: Optional[float] = Field(default=None, gt=0)
    s: Optional[int] = Field(default=None, ge=1)
    lam: Optional[float] = Field(default=None, ge=0)
    lambda_frac: Optional[float] = Field(default=None, ge=0)
    eta: Optional[float] = Field(default=None, gt=0)
    eta_exponent: Optional[float] = None
    lambda_cut: Optional[float] = Field(default=None, ge=0)
    exact: bool = False

    # Coefficients
    coefficients: CoefficientRule = CoefficientRule.ALL_ONES

    # Arcs and mollifiers
    Q: Optional[int] = Field(default=None, ge=1)
    shift: Optional[int] = Field(default=None, ge=0)
    c1: Optional[float] = Field(default=None, gt=0, le=1)
    Q1: Optional[int] = Field(default=None, ge=1)
    variant: Variant = Variant.PLAIN
    mode: Optional[str] = None

    # Arithmetic
    a: Optional[int] = None
    b: int = 0
    q: Optional[int] = Field(default=None, ge=1)
    B: int = Field(default=1, ge=1)
    D: Optional[float] = Field(default=None, ge=1)
    X: Optional[int] = Field(default=None, ge=1)
    qmax: Optional[int] = Field(default=None, ge=1)
    Qmax: int = Field(default=64, ge=1)
    R: float = Field(default=16.0, gt=0)
    eps: float = Field(default=0.0, ge=0)
    n_max: int = Field(default=256, ge=0)

    # Scans
    samples: int = Field(default=256, ge=1)
    n_theta: int = Field(default=64, ge=1)
    tau: Optional[float] = Field(default=None, gt=0, lt=1)
    beta: float = 0.0
    m_cut: int = Field(default=8, ge=0)
    oversample: int = Field(default=1, ge=1)
    offsets: List[float] = Field(default_factory=list)

    # Run
    seed: int = 0
    threads: Optional[int] = Field(default=None, ge=1)
    budget: Optional[int] = Field(default=None, ge=1)
    output_dir: Path = Path("results")
    table: Optional[Path] = None
    save_table: Optional[Path] = None

    @model_validator(mode="after")
    def _check_command(self) -> "ExperimentConfig":
        if self.command not in REQUIRED:
            raise ValueError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        missing = [name for name in REQUIRED[self.command] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.command} needs {', '.join('--' + m.replace('_', '-') for m in missing)}")
        if self.family is not None:
            self.surface()
        if self.N_list is not None and any(N < 1 for N in self.N_list):
            raise ValueError(f"every N must be >= 1, got {self.N_list}")
        return self

    def surface(self) -> SurfaceSystem:
        """The SurfaceSystem named by family, k, d and exponents."""
        if self.family is Family.KTH_POWERS:
            return SurfaceSystem.kth_powers(self._need_k())
        if self.family is Family.K_PARABOLOID:
            return SurfaceSystem.k_paraboloid(self.d, self._need_k())
        if not self.exponents:
            raise ValueError("monomial_curve needs --exponents")
        return SurfaceSystem.monomial_curve(self.exponents)

    def _need_k(self) -> int:
        if self.k is None:
            raise ValueError(f"{self.family.value} needs --k")
        return self.k

    def weight(self, N: Optional[int] = None) -> WeightProfile:
        return WeightProfile(N=N or self.N, profile=self.profile)

    def resolved(self) -> dict:
        """JSON form with every default filled in."""
        return self.model_dump(mode="json")
