"""Shared generators for the test suite. All randomness is seeded."""

import numpy as np


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_complex(gen, shape) -> np.ndarray:
    return gen.standard_normal(shape) + 1j * gen.standard_normal(shape)


def random_hermitian(gen, d: int) -> np.ndarray:
    a = random_complex(gen, (d, d))
    return (a + a.conj().T) / 2.0


def random_unitary(gen, d: int) -> np.ndarray:
    # QR of a Ginibre matrix, phases fixed so the distribution is Haar
    q, r = np.linalg.qr(random_complex(gen, (d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(gen, d: int, rank: int | None = None) -> np.ndarray:
    k = d if rank is None else rank
    a = random_complex(gen, (d, k))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_distribution(gen, n: int) -> np.ndarray:
    p = gen.random(n) + 1e-3
    return p / p.sum()
