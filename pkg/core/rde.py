"""Exact and sampled laws of V_k, the root-visit count of the depth-k self-similar model.

V_0 is the point mass at 0 and V_{k+1} is built from two independent copies of
V_k through the three-branch mixture

    X' + X        with probability 1/3
    I + X' + Y    with probability 2(1 - q)/3
    I + Z         with probability 2q/3

where X, X' are Bin(V, 1/2) thinnings, Y is a thinning conditioned strictly
below V, Z a thinning conditioned equal to V, I a fair coin and q = E[2^{-V}].
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from core.errors import BoundError, ContractViolation, InputError

logger = logging.getLogger(__name__)

RDE_MAX_DEPTH = 12


def _ratio(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class VPmf:
    """Exact law of V_k stored as integer numerators over one shared denominator."""

    k: int
    numerators: Tuple[int, ...]
    denominator: int

    @property
    def support_max(self) -> int:
        return len(self.numerators) - 1

    @property
    def pmf(self) -> List[Fraction]:
        return [Fraction(n, self.denominator) for n in self.numerators]

    @property
    def q(self) -> Fraction:
        """E[(1/2)^V] as an exact rational."""
        s = self.support_max
        return Fraction(sum(n << (s - v) for v, n in enumerate(self.numerators)), self.denominator << s)

    def pgf(self, x: Fraction) -> Fraction:
        """E[x^V] evaluated exactly at a rational point."""
        x = Fraction(x)
        p, r = x.numerator, x.denominator
        s = self.support_max
        # sum_v N_v p^v r^(s-v)
        total = sum(n * p ** v * r ** (s - v) for v, n in enumerate(self.numerators))
        return Fraction(total, self.denominator * r ** s)

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "pmf": {str(v): _ratio(m) for v, m in enumerate(self.pmf) if m},
            "q": _ratio(self.q),
        }


def support_bound(k: int) -> int:
    """Largest value V_k can take: 0 for k = 0, else 2^(k-1)."""
    return 0 if k == 0 else 1 << (k - 1)


def _thin_half(numerators: Sequence[int]) -> List[int]:
    """Numerators of Bin(V, 1/2) over the denominator D * 2^s."""
    s = len(numerators) - 1
    out = [0] * (s + 1)
    for v, n in enumerate(numerators):
        if n == 0:
            continue
        w = n << (s - v)
        c = 1
        for j in range(v + 1):
            out[j] += w * c
            c = c * (v - j) // (j + 1)
    return out


def _convolve(a: Sequence[int], b: Sequence[int]) -> np.ndarray:
    return np.convolve(np.array(a, dtype=object), np.array(b, dtype=object))


def rde_step(prev: VPmf) -> VPmf:
    """One recursion step V_k -> V_{k+1} in exact integer arithmetic."""
    s = prev.support_max
    nx = _thin_half(prev.numerators)
    dx = prev.denominator << s
    nw = [n << (s - j) for j, n in enumerate(prev.numerators)]
    if sum(nw) <= 0:
        raise ContractViolation("q must be positive for a finite-depth law")

    pair = np.array([1, 1], dtype=object)
    a_branch = _convolve(nx, nx)
    b_branch = _convolve(pair, _convolve(nx, [x - w for x, w in zip(nx, nw)]))
    c_branch = _convolve(pair, nw) * dx

    size = max(len(a_branch), len(b_branch), len(c_branch))
    total = [0] * size
    for branch in (a_branch, b_branch, c_branch):
        for j, value in enumerate(branch):
            total[j] += int(value)
    while len(total) > 1 and total[-1] == 0:
        total.pop()

    denominator = 3 * dx * dx
    if any(t < 0 for t in total) or sum(total) != denominator:
        raise ContractViolation(f"recursion step {prev.k} -> {prev.k + 1} lost mass")
    if len(total) - 1 > support_bound(prev.k + 1):
        raise ContractViolation(f"V_{prev.k + 1} has mass beyond {support_bound(prev.k + 1)}")

    g = math.gcd(denominator, *total)
    return VPmf(prev.k + 1, tuple(t // g for t in total), denominator // g)


def rde_pmf_exact(k: int) -> VPmf:
    """Exact law of V_k for 0 <= k <= 12."""
    if not 0 <= k <= RDE_MAX_DEPTH:
        raise BoundError(f"rde depth must lie in [0, {RDE_MAX_DEPTH}], got {k}")
    pmf = VPmf(0, (1,), 1)
    for _ in range(k):
        pmf = rde_step(pmf)
        logger.debug("V_%d: support %d, denominator %d bits", pmf.k, pmf.support_max, pmf.denominator.bit_length())
    return pmf


# ----------------------------------------------------------------------
# Mixture components (rational form, for inspection and cross-checks)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RdeMixture:
    X: List[Fraction]
    Y: Optional[List[Fraction]]
    Z: List[Fraction]
    I: List[Fraction]
    q: Fraction
    weights: Tuple[Fraction, Fraction, Fraction]

    def combine(self) -> List[Fraction]:
        """Law of the mixture, i.e. of V_{k+1}."""
        w_a, w_b, w_c = self.weights
        out: Dict[int, Fraction] = {}

        def add(dist: Dict[int, Fraction], weight: Fraction):
            for v, m in dist.items():
                out[v] = out.get(v, Fraction(0)) + weight * m

        add(_fconv(self.X, self.X), w_a)
        if w_b:
            add(_fconv(self.I, self.X, self.Y), w_b)
        add(_fconv(self.I, self.Z), w_c)
        top = max(v for v, m in out.items() if m)
        return [out.get(v, Fraction(0)) for v in range(top + 1)]


def _fconv(*dists: Sequence[Fraction]) -> Dict[int, Fraction]:
    acc = {0: Fraction(1)}
    for dist in dists:
        nxt: Dict[int, Fraction] = {}
        for a, pa in acc.items():
            for b, pb in enumerate(dist):
                if pb:
                    nxt[a + b] = nxt.get(a + b, Fraction(0)) + pa * pb
        acc = nxt
    return acc


def rde_mixture(pmf: VPmf) -> RdeMixture:
    """The components X, Y, Z, I and weights of one recursion step from ``pmf``."""
    p = pmf.pmf
    s = pmf.support_max
    x = [sum((p[v] * math.comb(v, j) / 2 ** v for v in range(j, s + 1)), Fraction(0)) for j in range(s + 1)]
    w = [p[j] / 2 ** j for j in range(s + 1)]
    q = sum(w, Fraction(0))
    if q == 0:
        raise ContractViolation("q vanished; V_k always has mass at 0")
    y = None if q == 1 else [(x[j] - w[j]) / (1 - q) for j in range(s + 1)]
    z = [w[j] / q for j in range(s + 1)]
    weights = (Fraction(1, 3), 2 * (1 - q) / 3, 2 * q / 3)
    return RdeMixture(X=x, Y=y, Z=z, I=[Fraction(1, 2), Fraction(1, 2)], q=q, weights=weights)


# ----------------------------------------------------------------------
# Sampling
# ----------------------------------------------------------------------

def sample_many(k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` independent samples of V_k by simulating the subtree recursion.

    The frog woken at the root's child moves to u, back to the root or onto v
    with probability 1/3 each.  Frogs coming up from v's subtree (a copy of
    V_{k-1}) go on to the root or to u with probability 1/2 each; u's subtree
    contributes an independent copy only if u was reached.
    """
    if k < 0:
        raise InputError(f"k must be >= 0, got {k}")
    if k == 0:
        return np.zeros(n, dtype=np.int64)
    from_v = sample_many(k - 1, n, rng)
    from_u = sample_many(k - 1, n, rng)
    move = rng.integers(0, 3, size=n)
    back = rng.binomial(from_v, 0.5)
    u_visited = (move == 0) | (back < from_v)
    return (move == 1).astype(np.int64) + back + np.where(u_visited, rng.binomial(from_u, 0.5), 0)


def rde_sample(k: int, rng: np.random.Generator) -> int:
    return int(sample_many(k, 1, rng)[0])


def goodness_of_fit(samples: np.ndarray, pmf: VPmf, min_expected: float = 5.0) -> Tuple[float, float]:
    """Chi-square test of ``samples`` against ``pmf``; sparse bins are pooled upward.

    Returns (statistic, p-value).
    """
    samples = np.asarray(samples)
    if samples.size == 0:
        raise InputError("no samples to test")
    if samples.min() < 0 or samples.max() > pmf.support_max:
        raise InputError("samples fall outside the support of the law")

    n = samples.size
    observed = np.bincount(samples, minlength=pmf.support_max + 1).astype(float)
    expected = np.array([float(m) for m in pmf.pmf]) * n

    obs_bins, exp_bins = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_bins.append(o_acc)
            exp_bins.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_bins:
            obs_bins[-1] += o_acc
            exp_bins[-1] += e_acc
        else:
            obs_bins.append(o_acc)
            exp_bins.append(e_acc)
    if len(obs_bins) < 2:
        return 0.0, 1.0

    f_exp = np.array(exp_bins)
    f_exp *= n / f_exp.sum()
    result = stats.chisquare(np.array(obs_bins), f_exp)
    return float(result.statistic), float(result.pvalue)
