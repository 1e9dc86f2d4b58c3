import numpy as np
import pytest

from crpower.errors import DegenerateSensingError
from crpower.sensing import SensingSpec, derive_sensing


def enumerate_joint(spec):
    """Oracle: joint law of (true state, decision) from the four events."""
    # rows: true state (0 idle, 1 busy); cols: decision (0 idle, 1 busy)
    joint = np.array([
        [spec.prior_idle * (1.0 - spec.p_f), spec.prior_idle * spec.p_f],
        [spec.prior_busy * (1.0 - spec.p_d), spec.prior_busy * spec.p_d],
    ])
    return joint


def test_perfect_sensing_collapses_posteriors():
    sd = derive_sensing(SensingSpec(p_d=1.0, p_f=0.0, prior_idle=0.4, prior_busy=0.6))
    assert sd.pr_busy_decision == pytest.approx(0.6)
    assert sd.post_busy_given_busy == 1.0
    assert sd.post_busy_given_idle == 0.0


def test_hand_bayes_example_matches_event_enumeration():
    spec = SensingSpec(p_d=0.8, p_f=0.1, prior_idle=0.4, prior_busy=0.6)
    sd = derive_sensing(spec)
    joint = enumerate_joint(spec)
    assert sd.pr_busy_decision == pytest.approx(joint[:, 1].sum(), abs=1e-15)
    assert sd.pr_idle_decision == pytest.approx(joint[:, 0].sum(), abs=1e-15)
    assert sd.post_busy_given_idle == pytest.approx(joint[1, 0] / joint[:, 0].sum(), abs=1e-15)
    assert sd.post_busy_given_busy == pytest.approx(joint[1, 1] / joint[:, 1].sum(), abs=1e-15)
    # frozen hand values
    assert sd.pr_busy_decision == pytest.approx(0.52)
    assert sd.pr_idle_decision == pytest.approx(0.48)
    assert sd.post_busy_given_idle == pytest.approx(0.25)
    assert sd.post_busy_given_busy == pytest.approx(12.0 / 13.0)


def test_uninformative_sensing_returns_priors():
    for p in (0.2, 0.5, 0.9):
        sd = derive_sensing(SensingSpec(p_d=p, p_f=p, prior_idle=0.3, prior_busy=0.7))
        assert sd.post_busy_given_idle == pytest.approx(0.7, abs=1e-12)
        assert sd.post_busy_given_busy == pytest.approx(0.7, abs=1e-12)


def test_total_probability_identity_random_specs():
    rng = np.random.default_rng(7)
    for _ in range(200):
        prior_busy = rng.uniform(0.05, 0.95)
        spec = SensingSpec(
            p_d=rng.uniform(0.05, 0.95),
            p_f=rng.uniform(0.05, 0.95),
            prior_idle=1.0 - prior_busy,
            prior_busy=prior_busy,
        )
        sd = derive_sensing(spec)
        total = (
            sd.pr_idle_decision * sd.post_busy_given_idle
            + sd.pr_busy_decision * sd.post_busy_given_busy
        )
        assert abs(total - prior_busy) <= 1e-12
        assert abs(sd.pr_idle_decision + sd.pr_busy_decision - 1.0) <= 1e-12


def test_idle_posterior_nonincreasing_in_detection_probability():
    prev = np.inf
    for p_d in np.linspace(0.0, 1.0, 21):
        sd = derive_sensing(SensingSpec(p_d=p_d, p_f=0.3, prior_idle=0.4, prior_busy=0.6))
        assert sd.post_busy_given_idle <= prev + 1e-15
        prev = sd.post_busy_given_idle


def test_degenerate_decisions_raise():
    with pytest.raises(DegenerateSensingError, match="busy"):
        derive_sensing(SensingSpec(p_d=0.0, p_f=0.0, prior_idle=0.4, prior_busy=0.6))
    with pytest.raises(DegenerateSensingError, match="idle"):
        derive_sensing(SensingSpec(p_d=1.0, p_f=1.0, prior_idle=0.4, prior_busy=0.6))


def test_invalid_spec_rejected():
    with pytest.raises(ValueError):
        SensingSpec(p_d=1.2, p_f=0.0, prior_idle=0.4, prior_busy=0.6)
    with pytest.raises(ValueError):
        SensingSpec(p_d=0.5, p_f=0.0, prior_idle=0.5, prior_busy=0.6)
