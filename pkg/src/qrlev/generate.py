"""
Seeded generation of the test matrices used throughout the
experiments: Gaussian matrices, random orthonormal bases, matrices
with a prescribed geometric singular-value profile, and the two
1000 x 25 workhorses with stepped leverage-score plateaus.

Every generator takes an explicit seed or numpy Generator; identical
seeds reproduce identical matrices. numpy's default PCG64 bit
generator with the ziggurat normal transform supplies the streams.
"""

from dataclasses import dataclass, field, asdict

import numpy as np

from .linalg import as_matrix, householder_qr

# Fixed recipe behind the stepped-leverage matrices: four row blocks
# of 250, scaled 1, 1e2, 1e3, 1e4, times a 1000 x 25 Gaussian.
STEPPED_M = 1000
STEPPED_N = 25
STEPPED_BLOCK_SIZES = (250, 250, 250, 250)
STEPPED_BLOCK_SCALES = (1.0, 1e2, 1e3, 1e4)


def make_rng(seed_or_rng):
    """Accept an integer seed or a ready Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


@dataclass
class GenSpec:
    """
    Serializable recipe for a generated matrix.

    sv_mode selects the singular-value profile of the result:
    "gaussian" is a raw i.i.d. normal core (kappa ignored),
    "randsvd" is a core with geometric singular values from 1 down
    to 1/kappa, and "orthonormal" orthonormalizes the row-scaled
    Gaussian product via QR (kappa exactly 1). Row-block scaling,
    when block_sizes is nonempty, is applied before any
    orthonormalization.
    """

    m: int
    n: int
    block_sizes: list = field(default_factory=list)
    block_scales: list = field(default_factory=list)
    kappa: float = 1.0
    sv_mode: str = "gaussian"

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("dimensions must be positive")
        if len(self.block_sizes) != len(self.block_scales):
            raise ValueError("block_sizes and block_scales must have equal length")
        if self.block_sizes and sum(self.block_sizes) != self.m:
            raise ValueError("block_sizes must sum to m")
        if any(s <= 0 for s in self.block_scales):
            raise ValueError("block_scales must be positive")
        if self.kappa < 1.0:
            raise ValueError("kappa must be at least 1")
        if self.sv_mode not in ("gaussian", "randsvd", "orthonormal"):
            raise ValueError(f"unknown sv_mode {self.sv_mode!r}")
        if self.sv_mode == "orthonormal" and self.m < self.n:
            raise ValueError("orthonormal mode needs m >= n")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        allowed = {"m", "n", "block_sizes", "block_scales", "kappa", "sv_mode"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown GenSpec fields: {sorted(unknown)}")
        return cls(**d)


def gaussian_matrix(m, n, rng):
    """i.i.d. standard normal m x n matrix from the seeded stream."""
    if m < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    return make_rng(rng).standard_normal((m, n))


def random_orthonormal(m, n, rng):
    """Orthonormal basis from the QR of a seeded Gaussian, m >= n."""
    return householder_qr(gaussian_matrix(m, n, rng)).q


def randsvd_matrix(m, n, kappa, rng):
    """
    Random matrix with geometrically spaced singular values.

    Singular values run from 1 down to 1/kappa as
    sigma_i = kappa**(-(i-1)/(n-1)) (all ones when n == 1 or
    kappa == 1), sandwiched between random orthonormal factors, so
    the condition number of the result is kappa up to round-off.
    """
    if kappa < 1.0:
        raise ValueError("kappa must be at least 1")
    rng = make_rng(rng)
    k = min(m, n)
    if k == 1:
        sigma = np.ones(1)
    else:
        sigma = kappa ** (-np.arange(k) / (k - 1))
    u = random_orthonormal(m, k, rng)
    v = random_orthonormal(n, k, rng)
    return (u * sigma) @ v.T


def _block_scaling(block_sizes, block_scales):
    return np.repeat(np.asarray(block_scales, dtype=np.float64), block_sizes)


def stepped_gaussian(rng):
    """
    The raw row-scaled Gaussian behind the stepped matrices: four
    250-row blocks scaled 1, 1e2, 1e3, 1e4 times randn(1000, 25).
    """
    d = _block_scaling(STEPPED_BLOCK_SIZES, STEPPED_BLOCK_SCALES)
    return d[:, None] * gaussian_matrix(STEPPED_M, STEPPED_N, rng)


def stepped_orthonormal_spec():
    return GenSpec(
        m=STEPPED_M,
        n=STEPPED_N,
        block_sizes=list(STEPPED_BLOCK_SIZES),
        block_scales=list(STEPPED_BLOCK_SCALES),
        sv_mode="orthonormal",
    )


def stepped_illconditioned_spec(kappa=1e6):
    return GenSpec(
        m=STEPPED_M,
        n=STEPPED_N,
        block_sizes=list(STEPPED_BLOCK_SIZES),
        block_scales=list(STEPPED_BLOCK_SCALES),
        kappa=kappa,
        sv_mode="randsvd",
    )


def stepped_orthonormal(rng):
    """
    1000 x 25 orthonormal matrix whose leverage scores rise in four
    plateaus from about 1e-10 to about 1e-1 (kappa2 == 1 by
    construction).
    """
    return generate(stepped_orthonormal_spec(), rng)


def stepped_illconditioned(rng, kappa=1e6):
    """
    Ill-conditioned companion of stepped_orthonormal: the same
    row-block scaling applied to a randsvd core with the given kappa.
    Leverage plateaus mimic the orthonormal variant while the
    condition number of the product lands near the core's kappa
    (seed dependent; measured, not asserted).
    """
    return generate(stepped_illconditioned_spec(kappa), rng)


def generate(spec, rng):
    """Materialize a GenSpec with the given seed or Generator."""
    rng = make_rng(rng)
    if spec.sv_mode == "randsvd":
        core = randsvd_matrix(spec.m, spec.n, spec.kappa, rng)
    else:
        core = gaussian_matrix(spec.m, spec.n, rng)
    if spec.block_sizes:
        core = _block_scaling(spec.block_sizes, spec.block_scales)[:, None] * core
    if spec.sv_mode == "orthonormal":
        return householder_qr(core).q
    return core


def verify_generated(a):
    """Basic sanity hook used by the CLI: finite entries, 2-d."""
    return as_matrix(a, "generated matrix")
