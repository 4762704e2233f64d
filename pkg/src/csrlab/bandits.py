"""Multi-armed bandit policies: epsilon-greedy, softmax, UCB, Thompson.

Arms are integers ``0..n_arms-1``.  Every policy keeps exact per-arm reward
sums and counts, so the reported mean is always the arithmetic mean of the
rewards fed to that arm.  Untried arms carry a mean estimate of 0.

Arm statistics are stored densely (numpy arrays) up to ``DENSE_LIMIT`` arms
and sparsely (dicts) beyond it.  The sparse path also handles selection
without materializing the arm space: the untried arms act as one pooled
candidate whose draw is then resolved to a uniform untried index.  This keeps
flat enumeration agents runnable on action spaces far too large to converge
on, which is itself a behavior worth reproducing.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np
from scipy.stats import norm

__all__ = [
    "BanditPolicy",
    "EpsilonGreedy",
    "Softmax",
    "Ucb",
    "ThompsonGaussian",
    "make_policy",
    "policy_from_state",
    "DENSE_LIMIT",
]

DENSE_LIMIT = 200_000


class BanditPolicy:
    """Shared storage and bookkeeping; subclasses implement selection."""

    kind = "base"

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise ValueError("n_arms must be at least 1")
        self.n_arms = n_arms
        self.total = 0  # total updates across arms
        self._dense = n_arms <= DENSE_LIMIT
        if self._dense:
            self._counts = np.zeros(n_arms, dtype=np.int64)
            self._sums = np.zeros(n_arms, dtype=np.float64)
        else:
            self._counts_d: dict[int, int] = {}
            self._sums_d: dict[int, float] = {}

    # -- stats ---------------------------------------------------------------

    def count(self, arm: int) -> int:
        return int(self._counts[arm]) if self._dense else self._counts_d.get(arm, 0)

    def mean(self, arm: int) -> float:
        n = self.count(arm)
        if n == 0:
            return 0.0
        s = float(self._sums[arm]) if self._dense else self._sums_d[arm]
        return s / n

    def tried_arms(self) -> list[int]:
        if self._dense:
            return [int(a) for a in np.nonzero(self._counts)[0]]
        return sorted(self._counts_d)

    def _check_arm(self, arm: int) -> None:
        if not (0 <= arm < self.n_arms):
            raise ValueError(f"arm {arm} out of range [0, {self.n_arms})")

    def update(self, arm: int, reward: float) -> None:
        """Record one reward and apply any hyperparameter decay."""
        self._check_arm(arm)
        if not math.isfinite(reward):
            raise ValueError("reward must be finite")
        if self._dense:
            self._counts[arm] += 1
            self._sums[arm] += reward
        else:
            self._counts_d[arm] = self._counts_d.get(arm, 0) + 1
            self._sums_d[arm] = self._sums_d.get(arm, 0.0) + reward
        self.total += 1
        self._decay()

    def _decay(self) -> None:
        pass

    def sample(self, rng: np.random.Generator) -> int:
        raise NotImplementedError

    # -- serialization -------------------------------------------------------

    def _hyper_state(self) -> dict[str, Any]:
        return {}

    def to_state(self) -> dict[str, Any]:
        """JSON-serializable checkpoint: kind, hyperparameters, arm stats."""
        arms = {}
        for a in self.tried_arms():
            n = self.count(a)
            s = float(self._sums[a]) if self._dense else self._sums_d[a]
            arms[str(a)] = {"count": n, "sum": s, "mean": s / n}
        return {
            "kind": self.kind,
            "n_arms": self.n_arms,
            "total": self.total,
            "hyper": self._hyper_state(),
            "arms": arms,
        }

    def _load_arms(self, state: dict[str, Any]) -> None:
        self.total = int(state.get("total", 0))
        for key, rec in state.get("arms", {}).items():
            arm = int(key)
            self._check_arm(arm)
            if self._dense:
                self._counts[arm] = int(rec["count"])
                self._sums[arm] = float(rec["sum"])
            else:
                self._counts_d[arm] = int(rec["count"])
                self._sums_d[arm] = float(rec["sum"])

    # -- shared selection helpers --------------------------------------------

    def _untried_count(self) -> int:
        tried = int(np.count_nonzero(self._counts)) if self._dense else len(self._counts_d)
        return self.n_arms - tried

    def _random_untried(self, rng: np.random.Generator) -> int:
        """Uniform over untried arms; rejection sampling on the sparse path."""
        if self._dense:
            pool = np.nonzero(self._counts == 0)[0]
            return int(pool[int(rng.integers(len(pool)))])
        while True:
            arm = int(rng.integers(self.n_arms))
            if arm not in self._counts_d:
                return arm

    def _greedy(self, rng: np.random.Generator) -> int:
        """Arm with the highest mean; untried arms count as mean 0.

        Ties resolve to the lowest arm index, except that a tie at 0 between
        every tried arm and the untried pool resolves to a uniform untried
        arm on the sparse path (materializing indices there is impossible).
        """
        if self._dense:
            means = np.where(self._counts > 0, self._sums / np.maximum(self._counts, 1), 0.0)
            return int(np.argmax(means))
        best_arm, best_mean = None, -math.inf
        for arm, n in self._counts_d.items():
            m = self._sums_d[arm] / n
            if m > best_mean or (m == best_mean and (best_arm is None or arm < best_arm)):
                best_arm, best_mean = arm, m
        if self._untried_count() > 0 and (best_arm is None or best_mean <= 0.0):
            return self._random_untried(rng)
        return best_arm


class EpsilonGreedy(BanditPolicy):
    """Uniform exploration with probability epsilon, else greedy."""

    kind = "epsilon_greedy"

    def __init__(self, n_arms: int, epsilon: float = 0.1, decay: float = 0.999):
        super().__init__(n_arms)
        if not (0.0 <= epsilon <= 1.0):
            raise ValueError("epsilon must lie in [0, 1]")
        if not (0.0 < decay <= 1.0):
            raise ValueError("decay must lie in (0, 1]")
        self.epsilon = epsilon
        self.decay = decay

    def sample(self, rng):
        if rng.random() < self.epsilon:
            return int(rng.integers(self.n_arms))
        return self._greedy(rng)

    def _decay(self):
        self.epsilon *= self.decay

    def _hyper_state(self):
        return {"epsilon": self.epsilon, "decay": self.decay}


class Softmax(BanditPolicy):
    """Boltzmann selection over mean rewards with a decaying temperature."""

    kind = "softmax"

    def __init__(self, n_arms: int, temperature: float = 0.1, decay: float = 0.999):
        super().__init__(n_arms)
        if temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if not (0.0 < decay <= 1.0):
            raise ValueError("decay must lie in (0, 1]")
        self.temperature = temperature
        self.decay = decay

    def sample(self, rng):
        tau = max(self.temperature, 1e-12)
        if self._dense:
            means = np.where(self._counts > 0, self._sums / np.maximum(self._counts, 1), 0.0)
            logits = (means - means.max()) / tau
            w = np.exp(logits)
            return int(rng.choice(self.n_arms, p=w / w.sum()))
        # Sparse: tried arms individually, untried arms as one pooled weight.
        arms = list(self._counts_d)
        means = [self._sums_d[a] / self._counts_d[a] for a in arms]
        top = max(means, default=0.0)
        top = max(top, 0.0)
        weights = [math.exp((m - top) / tau) for m in means]
        n_untried = self._untried_count()
        pool = n_untried * math.exp((0.0 - top) / tau)
        z = sum(weights) + pool
        u = rng.random() * z
        acc = 0.0
        for a, w in zip(arms, weights):
            acc += w
            if u < acc:
                return a
        return self._random_untried(rng)

    def _decay(self):
        self.temperature *= self.decay

    def _hyper_state(self):
        return {"temperature": self.temperature, "decay": self.decay}


class Ucb(BanditPolicy):
    """Mean plus c*sqrt(ln t / n) upper confidence bound; untried arms first.

    Untried arms are taken in ascending index order, which doubles as the
    deterministic initial sweep.
    """

    kind = "ucb"

    def __init__(self, n_arms: int, c: float = 1.0):
        super().__init__(n_arms)
        if c < 0.0:
            raise ValueError("c must be non-negative")
        self.c = c
        self._next_untried = 0

    def sample(self, rng):
        while self._next_untried < self.n_arms and self.count(self._next_untried) > 0:
            self._next_untried += 1
        if self._next_untried < self.n_arms:
            return self._next_untried
        t = max(self.total, 1)
        if self._dense:
            means = self._sums / self._counts
            bonus = self.c * np.sqrt(math.log(t) / self._counts)
            return int(np.argmax(means + bonus))
        best_arm, best_val = None, -math.inf
        for arm, n in self._counts_d.items():
            val = self._sums_d[arm] / n + self.c * math.sqrt(math.log(t) / n)
            if val > best_val or (val == best_val and arm < best_arm):
                best_arm, best_val = arm, val
        return best_arm

    def _hyper_state(self):
        return {"c": self.c}


class ThompsonGaussian(BanditPolicy):
    """Gaussian posterior sampling with unit observation noise.

    Prior N(prior_mean, prior_var) per arm; the posterior after n unit-noise
    observations has variance 1/(1/prior_var + n).  Selection draws one value
    per arm and plays the argmax.  On the sparse path the maximum over the
    untried pool is drawn in closed form from the max-of-k distribution.
    """

    kind = "thompson"

    def __init__(self, n_arms: int, prior_mean: float = 0.5, prior_var: float = 1.0):
        super().__init__(n_arms)
        if prior_var <= 0.0:
            raise ValueError("prior_var must be positive")
        self.prior_mean = prior_mean
        self.prior_var = prior_var

    def _posterior(self, n: int, s: float) -> tuple[float, float]:
        prec = 1.0 / self.prior_var + n
        mean = (self.prior_mean / self.prior_var + s) / prec
        return mean, 1.0 / prec

    def sample(self, rng):
        if self._dense:
            prec = 1.0 / self.prior_var + self._counts
            means = (self.prior_mean / self.prior_var + self._sums) / prec
            draws = rng.normal(means, np.sqrt(1.0 / prec))
            return int(np.argmax(draws))
        best_arm, best_val = None, -math.inf
        for arm, n in self._counts_d.items():
            mean, var = self._posterior(n, self._sums_d[arm])
            val = mean + math.sqrt(var) * rng.standard_normal()
            if val > best_val:
                best_arm, best_val = arm, val
        k = self._untried_count()
        if k > 0:
            u = rng.random()
            if u <= 0.0:
                u = 1e-300
            # Max of k iid prior draws via inverse CDF, computed stably.
            tail = -math.expm1(math.log(u) / k)
            z = float(norm.isf(max(tail, 1e-300)))
            val = self.prior_mean + math.sqrt(self.prior_var) * z
            if val > best_val:
                return self._random_untried(rng)
        return best_arm

    def _hyper_state(self):
        return {"prior_mean": self.prior_mean, "prior_var": self.prior_var}


_KINDS = {
    "epsilon_greedy": EpsilonGreedy,
    "softmax": Softmax,
    "ucb": Ucb,
    "thompson": ThompsonGaussian,
}


def make_policy(kind: str, n_arms: int, **hyper: float) -> BanditPolicy:
    """Construct a policy by kind name with keyword hyperparameters."""
    if kind not in _KINDS:
        raise ValueError(f"unknown bandit kind {kind!r}; expected one of {sorted(_KINDS)}")
    return _KINDS[kind](n_arms, **hyper)


def policy_from_state(state: dict[str, Any]) -> BanditPolicy:
    """Rebuild a policy from its to_state() checkpoint."""
    policy = make_policy(state["kind"], int(state["n_arms"]), **state.get("hyper", {}))
    policy._load_arms(state)
    return policy
