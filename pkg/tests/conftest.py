import numpy as np
import pytest

from ringwalk.qcore import Circuit, Gate, Statevector


def _random_circuit(rng: np.random.Generator, n: int, length: int) -> Circuit:
    gates = []
    for _ in range(length):
        if rng.random() < 0.5:
            gates.append(Gate("H", (int(rng.integers(n)),)))
        else:
            control, target = rng.choice(n, size=2, replace=False)
            gates.append(Gate("CS", (int(control), int(target))))
    return Circuit(n, gates)


def _random_state(rng: np.random.Generator, n: int) -> Statevector:
    amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return Statevector(amps / np.linalg.norm(amps))


@pytest.fixture()
def random_circuit():
    """Seeded Kitaev-basis circuits on 2 to 4 qubits with 1 to 6 gates."""

    def _func(seed: int) -> Circuit:
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        return _random_circuit(rng, n, int(rng.integers(1, 7)))

    yield _func


@pytest.fixture()
def random_state():
    def _func(seed: int, n: int) -> Statevector:
        return _random_state(np.random.default_rng(seed), n)

    yield _func
