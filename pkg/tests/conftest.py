import numpy as np
import pytest

from qcmachine import BathSpec, MachineParams


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture
def cold_coherence_params():
    """Cold coherent bath: B=1, gamma=1, B1=0.9, B2=1.2, T1=2.5, T2=3, eps1=0.3."""
    return MachineParams(
        B=1.0, gamma=1.0,
        bath1=BathSpec(T=2.5, B=0.9, epsilon=0.3, phi=0.0),
        bath2=BathSpec(T=3.0, B=1.2),
    )


@pytest.fixture
def hot_coherence_params():
    """Hot coherent bath: B=1, gamma=1, B1=1.2, T1=3, T2=2.5, B2 swept in the curve and diagram tests."""
    return MachineParams(
        B=1.0, gamma=1.0,
        bath1=BathSpec(T=3.0, B=1.2, epsilon=0.1, phi=0.0),
        bath2=BathSpec(T=2.5, B=1.1),
    )


def random_qubit_state(rng):
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_density_matrix(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_machine(rng, eps1=None, eps2=None):
    def eps(x):
        return rng.uniform(0.0, 1.0) if x is None else x

    return MachineParams(
        B=rng.uniform(0.5, 2.0),
        gamma=rng.uniform(0.5, 2.0),
        bath1=BathSpec(T=rng.uniform(1.0, 5.0), B=rng.uniform(0.5, 2.0),
                       epsilon=eps(eps1), phi=rng.uniform(0.0, 2 * np.pi)),
        bath2=BathSpec(T=rng.uniform(1.0, 5.0), B=rng.uniform(0.5, 2.0),
                       epsilon=eps(eps2), phi=rng.uniform(0.0, 2 * np.pi)),
    )
