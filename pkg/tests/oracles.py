"""Independent reference implementations used to check the library."""
import numpy as np

from lhlc.operators import HamiltonianSum


def bit_embed(h: HamiltonianSum) -> np.ndarray:
    """Dense matrix built entry by entry from basis-state bits (no Kronecker products)."""
    n = h.system_size
    d = 2 ** n
    out = np.zeros((d, d), dtype=complex)
    bits = [format(i, f"0{n}b") for i in range(d)]
    for term in h.terms:
        sup = [q - 1 for q in term.support]
        rest = [q for q in range(n) if q not in sup]
        for i in range(d):
            for j in range(d):
                if all(bits[i][q] == bits[j][q] for q in rest):
                    a = int("".join(bits[i][q] for q in sup), 2)
                    b = int("".join(bits[j][q] for q in sup), 2)
                    out[i, j] += term.coefficient * term.block[a, b]
    return out


def lowest(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(m)[0])


def kernel_projector(m: np.ndarray, cutoff: float = 1e-9) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    k = v[:, w < cutoff]
    return k @ k.conj().T


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_unit(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
