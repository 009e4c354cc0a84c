"""Qubit observables, three-qubit pure states, and operator utilities.

Measurements are ±1-outcome qubit observables: either a signed identity
or a Bloch observable ``n . sigma`` with a unit vector ``n``. States live
in the computational basis ``|000> .. |111>`` with party 1 as the most
significant qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MINUS_IDENTITY",
    "Observable",
    "PLUS_IDENTITY",
    "PureState",
    "bell_operator",
    "expectation",
    "max_eigenpair",
    "partial_transpose",
    "reduced_density",
    "sigma_x",
    "sigma_y",
    "sigma_z",
]

sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
sigma_y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
sigma_z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_PARTY_INDEX = {"A": 0, "B": 1, "C": 2}

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Observable:
    """One ±1-outcome projective qubit measurement.

    ``vector`` is a unit Bloch vector for ``n . sigma`` observables and
    ``None`` for the trivial measurements, whose constant outcome is
    ``sign``.
    """

    vector: tuple[float, float, float] | None = None
    sign: int = 1

    def __post_init__(self):
        if self.vector is None:
            if self.sign not in (1, -1):
                raise ValueError("identity observable needs sign +1 or -1")
            return
        vec = tuple(float(x) for x in self.vector)
        if len(vec) != 3:
            raise ValueError("Bloch vector must have three components")
        norm = float(np.sqrt(vec[0] ** 2 + vec[1] ** 2 + vec[2] ** 2))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"Bloch vector norm {norm} is not 1 within {_NORM_TOL}")
        object.__setattr__(self, "vector", vec)

    @classmethod
    def from_bloch(cls, x: float, y: float, z: float, normalize: bool = False) -> "Observable":
        if normalize:
            norm = float(np.sqrt(x * x + y * y + z * z))
            if norm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            x, y, z = x / norm, y / norm, z / norm
        return cls(vector=(x, y, z))

    @classmethod
    def identity(cls, sign: int) -> "Observable":
        return cls(vector=None, sign=sign)

    @property
    def is_identity(self) -> bool:
        return self.vector is None

    def matrix(self) -> np.ndarray:
        return observable_matrix(self)


PLUS_IDENTITY = Observable.identity(1)
MINUS_IDENTITY = Observable.identity(-1)


def observable_matrix(obs: Observable) -> np.ndarray:
    """2x2 Hermitian matrix of an observable."""
    if obs.is_identity:
        return obs.sign * np.eye(2, dtype=complex)
    x, y, z = obs.vector
    return x * sigma_x + y * sigma_y + z * sigma_z


class PureState:
    """Unit-norm three-qubit state vector."""

    __slots__ = ("_amplitudes",)

    def __init__(self, amplitudes):
        amp = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amp.shape != (8,):
            raise ValueError("state needs 8 amplitudes")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm {norm} is not 1 within {_NORM_TOL}")
        amp = amp.copy()
        amp.flags.writeable = False
        self._amplitudes = amp

    @classmethod
    def from_vector(cls, vector, normalize: bool = False) -> "PureState":
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            vec = vec / norm
        return cls(vec)

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    def density(self) -> np.ndarray:
        return np.outer(self._amplitudes, self._amplitudes.conj())

    def __repr__(self):
        return f"PureState({np.array2string(self._amplitudes, precision=6)})"


def _party_stacks(observables) -> list[np.ndarray]:
    """Per-party (3, 2, 2) stacks [identity, first setting, second setting]."""
    observables = tuple(observables)
    if len(observables) != 6:
        raise ValueError("need six observables in order (A, a, B, b, C, c)")
    stacks = []
    for party in range(3):
        stack = np.empty((3, 2, 2), dtype=complex)
        stack[0] = np.eye(2)
        stack[1] = observable_matrix(observables[2 * party])
        stack[2] = observable_matrix(observables[2 * party + 1])
        stacks.append(stack)
    return stacks


def bell_operator(expr, observables) -> np.ndarray:
    """8x8 Bell operator of an expression under six chosen observables."""
    tensor = expr.tensor().astype(float)
    ma, mb, mc = _party_stacks(observables)
    op = np.einsum("ijk,iad,jbe,kcf->abcdef", tensor, ma, mb, mc, optimize=True)
    return np.ascontiguousarray(op.reshape(8, 8))


def expectation(state: PureState, matrix: np.ndarray) -> float:
    """Real quadratic form <psi|M|psi>; tiny imaginary parts are discarded."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (8, 8):
        raise ValueError("expected an 8x8 operator")
    amp = state.amplitudes
    value = complex(np.vdot(amp, matrix @ amp))
    if abs(value.imag) >= 1e-10 * (1.0 + abs(value.real)):
        raise ValueError(f"quadratic form has imaginary part {value.imag}")
    return value.real


def _assert_hermitian(matrix: np.ndarray):
    scale = max(1.0, float(np.abs(matrix).max()))
    if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=1e-12 * scale):
        raise ValueError("matrix is not Hermitian within tolerance")


def max_eigenpair(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a deterministic unit eigenvector.

    When the top eigenvalue is degenerate, the returned vector is the
    normalized projection of the lowest-index basis vector onto the top
    eigenspace, which makes reruns reproducible. The vector's phase is
    fixed so its largest-magnitude amplitude is real and positive.
    """
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("expected a square matrix")
    _assert_hermitian(matrix)
    eigenvalues, vectors = np.linalg.eigh(matrix)
    top = float(eigenvalues[-1])
    tol = 1e-12 * max(1.0, abs(top))
    space = vectors[:, eigenvalues >= top - tol]
    if space.shape[1] == 1:
        vec = space[:, 0]
    else:
        row_norms = np.linalg.norm(space, axis=1)
        j = int(np.argmax(row_norms > 1e-8))
        vec = space @ space[j, :].conj()
        vec = vec / np.linalg.norm(vec)
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    vec = vec * phase.conjugate()
    return top, vec


def reduced_density(state: PureState, keep) -> np.ndarray:
    """4x4 reduced density matrix on an unordered pair of parties.

    ``keep`` names two distinct parties from {"A", "B", "C"}; the result
    is ordered with the earlier party as the most significant qubit.
    """
    labels = sorted({_PARTY_INDEX[str(k).upper()] for k in keep})
    if len(labels) != 2:
        raise ValueError("keep must name two distinct parties")
    psi = state.amplitudes.reshape(2, 2, 2)
    if labels == [0, 1]:
        rho = np.einsum("abc,dec->abde", psi, psi.conj())
    elif labels == [0, 2]:
        rho = np.einsum("abc,dbf->acdf", psi, psi.conj())
    else:
        rho = np.einsum("abc,aef->bcef", psi, psi.conj())
    return rho.reshape(4, 4)


def partial_transpose(rho: np.ndarray, subsystem: int) -> np.ndarray:
    """Transpose one qubit factor of a multi-qubit operator.

    ``subsystem`` is the 0-based position of the qubit among the tensor
    factors of ``rho`` (most significant first).
    """
    rho = np.asarray(rho)
    dim = rho.shape[0]
    if rho.ndim != 2 or rho.shape != (dim, dim):
        raise ValueError("expected a square matrix")
    n_qubits = int(round(np.log2(dim)))
    if 2**n_qubits != dim:
        raise ValueError("dimension must be a power of 2")
    if not 0 <= subsystem < n_qubits:
        raise ValueError(f"subsystem must lie in 0..{n_qubits - 1}")
    shaped = rho.reshape((2,) * (2 * n_qubits))
    swapped = np.swapaxes(shaped, subsystem, subsystem + n_qubits)
    return swapped.reshape(dim, dim)
