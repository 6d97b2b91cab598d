import pytest

from chainsim import AttackKind, AttackModel, Exponential, Gamma, Weibull


@pytest.fixture(scope="session")
def exp_oracle_model():
    """Exponential hacking (rate 0.2) and detecting (rate 3): the per-cycle
    hack probability has the closed form (0.2/3.2)^m = (1/16)^m."""
    return AttackModel(
        kind=AttackKind.DESTRUCTIVE,
        n=2,
        hack_time=Exponential(rate=0.2),
        detect_time=Exponential(rate=3.0),
    )


@pytest.fixture(scope="session")
def example1_model():
    """Golden exponential/exponential scenario: fast hacking (mean 0.2 per
    node), slow detection (mean 3); p_m = (15/16)^m."""
    return AttackModel(
        kind=AttackKind.DESTRUCTIVE,
        n=2,
        hack_time=Exponential(rate=5.0),
        detect_time=Exponential(rate=1.0 / 3.0),
    )


@pytest.fixture(scope="session")
def example2_model():
    """Golden gamma/gamma scenario."""
    return AttackModel(
        kind=AttackKind.DESTRUCTIVE,
        n=2,
        hack_time=Gamma(shape=0.05, rate=1.0 / 15.0),
        detect_time=Gamma(shape=2.0, rate=0.1),
    )


@pytest.fixture(scope="session")
def example3_model():
    """Golden gamma-hacking / Weibull-detecting scenario."""
    return AttackModel(
        kind=AttackKind.DESTRUCTIVE,
        n=2,
        hack_time=Gamma(shape=0.5, rate=1.0),
        detect_time=Weibull(scale=2.0, shape=1.5),
    )
