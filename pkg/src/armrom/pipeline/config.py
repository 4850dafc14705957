"""Run configuration: a versioned JSON document mapped onto a dataclass."""
from dataclasses import asdict, dataclass, field, fields, replace
import json

from ..errors import ConfigError
from ..sampling import CAVITY_DOMAIN, ELLIPTIC_DOMAIN, ParameterDomain, WeightingKernel

SCHEMA_VERSION = 1

ELLIPTIC_METHODS = ("arm-chord", "arm-newton", "grm-chord", "grm-newton", "lrm-chord", "lrm-newton")
CAVITY_METHODS = ("arm-galerkin", "grm-galerkin")


@dataclass
class RunConfig:
    problem: str = "elliptic"
    grid: list = field(default_factory=lambda: [50, 50])
    domain_lower: list = None
    domain_upper: list = None
    domain_scale: list = None
    train_counts: list = field(default_factory=lambda: [11, 11])
    train_lower: list = None         # training-grid corners; default to the domain's
    train_upper: list = None
    kernel: str = "gaussian"
    sigma: float = 2.0
    k: int = 10
    m: int = None                    # defaults to 2k
    methods: list = None
    k_sweep: list = None
    sigma_sweep: list = None
    lrm_neighbors: int = 9
    test_count: int = 200
    test_points: list = None         # explicit test parameters instead of random draws
    seed: int = 0
    tol: float = 1e-10
    max_iter: int = 200
    # cavity only
    lx: float = 1.0
    t_end: float = 50.0
    dt: float = 2e-3
    record_every: int = 25
    segment_count: int = 10
    segment_overlap: float = 1.0
    mode_tol: float = 1e-6
    max_modes: int = 80
    scheme: str = "upwind"
    timing: bool = True              # false writes nan times so bench CSVs are byte-reproducible
    workers: int = 1
    out: str = "run"
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.problem not in ("elliptic", "cavity"):
            raise ConfigError(f"problem must be 'elliptic' or 'cavity', got {self.problem!r}")
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        base = ELLIPTIC_DOMAIN if self.problem == "elliptic" else CAVITY_DOMAIN
        self.domain_lower = list(self.domain_lower or base.lower)
        self.domain_upper = list(self.domain_upper or base.upper)
        self.domain_scale = list(self.domain_scale or base.scale)
        if self.m is None:
            self.m = 2 * self.k
        if self.methods is None:
            self.methods = ["arm-chord"] if self.problem == "elliptic" else ["arm-galerkin"]
        allowed = ELLIPTIC_METHODS if self.problem == "elliptic" else CAVITY_METHODS
        bad = [mth for mth in self.methods if mth not in allowed]
        if bad:
            raise ConfigError(f"methods {bad} not available for {self.problem}; choose from {allowed}")
        if self.k < 1 or self.m < 1:
            raise ConfigError("k and m must be positive")
        try:
            self.domain
            self.train_domain
            self.make_kernel(self.sigma)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def domain(self):
        return ParameterDomain(self.domain_lower, self.domain_upper, self.domain_scale)

    @property
    def train_domain(self):
        """Box spanned by the training grid (the parameter domain unless overridden)."""
        return ParameterDomain(self.train_lower or self.domain_lower,
                               self.train_upper or self.domain_upper, self.domain_scale)

    def make_kernel(self, sigma=None):
        sigma = self.sigma if sigma is None else sigma
        if self.kernel == "uniform":
            return WeightingKernel.uniform()
        return WeightingKernel(self.kernel, float(sigma))

    @property
    def ks(self):
        return list(self.k_sweep) if self.k_sweep else [self.k]

    @property
    def sigmas(self):
        return list(self.sigma_sweep) if self.sigma_sweep else [self.sigma]

    def m_for(self, k):
        """DEIM size for a swept k: keeps the configured m/k ratio."""
        return max(1, int(round(k * self.m / self.k)))

    def to_dict(self):
        return asdict(self)

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def with_overrides(self, **kw):
        kw = {key: val for key, val in kw.items() if val is not None}
        if "k" in kw and "m" not in kw:
            kw["m"] = 2 * kw["k"]
        return replace(self, **kw)


def from_dict(data):
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    return from_dict(data)


def save(cfg, path):
    with open(path, "w") as fh:
        fh.write(cfg.dumps())
