"""Monte Carlo cross-check of the quadrature mutual information.

Draws output samples from the exact channel law and estimates mutual
information as an empirical average of the log densities.  This shares no
integration machinery with the quadrature path, so agreement between the
two is a genuine consistency check rather than a tautology.
"""

from dataclasses import dataclass

import numpy as np

from .density import log_output_density
from .kernels import ChannelModel, log_kernel_g, sample_R

N_SHARDS = 100


@dataclass(frozen=True)
class MCEstimate:
    """Sample-mean estimate with a shard-based standard error."""

    value: float
    std_err: float
    n_samples: int
    seed: int

    def to_dict(self):
        return {"value": self.value, "std_err": self.std_err,
                "n_samples": self.n_samples, "seed": self.seed}


def _stratum_counts(p, per_shard):
    """Per-point sample counts, roughly proportional to probability but at
    least one each so no stratum is ever silently dropped."""
    counts = np.maximum(np.floor(p * per_shard).astype(int), 1)
    while counts.sum() > per_shard:
        counts[int(np.argmax(counts))] -= 1
    while counts.sum() < per_shard:
        counts[int(np.argmax(p * per_shard - counts))] += 1
    if counts.min() < 1:
        raise ValueError("n_samples too small for the number of mass points")
    return counts


def mc_mutual_information(F, channel, n_samples, seed, q=None):
    """Monte Carlo mutual information of F over the given channel.

    Stratified by mass point: each point gets a fixed sample count roughly
    proportional to its probability, and strata are recombined with the
    exact probabilities, so count rounding introduces no bias.  Samples are
    split into 100 equal shards and the standard error is the empirical
    deviation of the shard means.  The quadrature config argument is
    accepted for interface symmetry with the deterministic evaluators but
    unused: the estimate needs no integrals.
    """
    n_samples = int(n_samples)
    if n_samples < 10_000:
        raise ValueError("n_samples must be at least 10000")
    per_shard = n_samples // N_SHARDS
    if per_shard * N_SHARDS != n_samples:
        raise ValueError(f"n_samples must be a multiple of {N_SHARDS}")
    K = channel.rician_k
    p = np.asarray(F.probabilities)
    r = np.asarray(F.locations)
    counts = _stratum_counts(p, per_shard)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    shard_means = np.empty(N_SHARDS)
    classical = channel.model is ChannelModel.CLASSICAL
    penalty = float(p @ np.log1p(r * r)) + 1.0
    for k in range(N_SHARDS):
        total = 0.0
        for i in range(r.size):
            R = sample_R(r[i], K, rng, size=counts[i])
            lf = log_output_density(R, F, K)
            if classical:
                total += p[i] * float(-lf.mean())
            else:
                lg = log_kernel_g(R, r[i], K)
                total += p[i] * float((lg - lf).mean())
        shard_means[k] = total
    value = float(shard_means.mean())
    if classical:
        value -= penalty
    std_err = float(shard_means.std(ddof=1) / np.sqrt(N_SHARDS))
    return MCEstimate(value=value, std_err=std_err, n_samples=n_samples, seed=int(seed))
