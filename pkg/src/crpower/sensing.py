"""Imperfect-sensing probability model.

A detector is characterized only by its detection and false-alarm
probabilities.  From those and the primary-activity priors we derive the
probabilities of each sensing decision and the Bayes posteriors of the true
primary state given the decision.  The posteriors set the effective noise
floor seen by the secondary link, so everything downstream consumes
:class:`SensingDerived`.
"""

from dataclasses import dataclass

from .errors import DegenerateSensingError

__all__ = ["SensingSpec", "SensingDerived", "derive_sensing"]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class SensingSpec:
    """Detector operating point plus primary-activity priors."""

    p_d: float
    p_f: float
    prior_idle: float
    prior_busy: float

    def __post_init__(self):
        for name in ("p_d", "p_f", "prior_idle", "prior_busy"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if abs(self.prior_idle + self.prior_busy - 1.0) > _PROB_TOL:
            raise ValueError(
                f"priors must sum to 1, got {self.prior_idle + self.prior_busy}"
            )


@dataclass(frozen=True)
class SensingDerived:
    """Decision probabilities and busy-state posteriors for both decisions.

    Also carries the detection probability, which downstream interference
    expectations weight the two decisions by (a missed detection interferes
    with probability ``1 - p_d``, a correct detection with ``p_d``).
    """

    pr_idle_decision: float
    pr_busy_decision: float
    post_busy_given_idle: float
    post_busy_given_busy: float
    p_d: float

    def decision_prob(self, k: int) -> float:
        """Probability of sensing decision k (0 = idle, 1 = busy)."""
        return self.pr_busy_decision if k else self.pr_idle_decision

    def post_busy(self, k: int) -> float:
        """Posterior that the primary is active given sensing decision k."""
        return self.post_busy_given_busy if k else self.post_busy_given_idle

    def interference_weight(self, k: int) -> float:
        """Probability of sensing decision k given an active primary.

        These are the weights the received-interference expectation puts on
        the two power levels."""
        return self.p_d if k else 1.0 - self.p_d


def derive_sensing(spec: SensingSpec) -> SensingDerived:
    """Derive decision probabilities and Bayes posteriors from a detector spec.

    The busy decision occurs with probability
    ``prior_idle * p_f + prior_busy * p_d``; the posterior of a truly busy
    channel under decision k follows from Bayes' rule.  Raises
    :class:`DegenerateSensingError` if either decision has probability zero,
    since the corresponding posterior would be 0/0.
    """
    pr_busy_dec = spec.prior_idle * spec.p_f + spec.prior_busy * spec.p_d
    pr_idle_dec = spec.prior_idle * (1.0 - spec.p_f) + spec.prior_busy * (1.0 - spec.p_d)
    if pr_idle_dec <= 0.0:
        raise DegenerateSensingError(
            "idle sensing decision has probability 0; posterior undefined"
        )
    if pr_busy_dec <= 0.0:
        raise DegenerateSensingError(
            "busy sensing decision has probability 0; posterior undefined"
        )
    return SensingDerived(
        pr_idle_decision=pr_idle_dec,
        pr_busy_decision=pr_busy_dec,
        post_busy_given_idle=spec.prior_busy * (1.0 - spec.p_d) / pr_idle_dec,
        post_busy_given_busy=spec.prior_busy * spec.p_d / pr_busy_dec,
        p_d=spec.p_d,
    )
