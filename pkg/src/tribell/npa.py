"""Moment-matrix upper bounds on quantum maxima (NPA hierarchy).

A word is a product of outcome projectors, one symbol per factor, where
symbol (party, setting) is the +1-outcome projector of that party's
setting. Projectors of distinct parties commute and projectors are
idempotent, which gives every word the canonical form computed by
``canonicalize_word``. The moment matrix Gamma is indexed by a level's
word list and cell (u, v) holds the moment of canonical(reverse(u) v);
cells sharing a canonical word form an equality class. Since moments of
a word and its reverse agree for the optimal value, both are mapped to
one class representative and Gamma is real symmetric.

The bound is computed by an operator-splitting (ADMM) iteration that
alternates projection onto the affine class structure with projection
onto the positive-semidefinite cone, then adds a residual-derived
safety margin on top of the reported objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import groupby, product

import numpy as np

from .bell_expr import BellExpression

__all__ = [
    "LEVELS",
    "MomentProblem",
    "SdpParams",
    "SdpSolution",
    "build_moment_problem",
    "canonicalize_word",
    "expand_correlator",
    "generate_words",
    "npa_upper_bound",
    "sdp_maximize",
]

Word = tuple[tuple[int, int], ...]

LEVELS = ("Q1", "1+AB", "AQ", "Q2")


def _check_word(word) -> Word:
    word = tuple(tuple(symbol) for symbol in word)
    for party, setting in word:
        if party not in (1, 2, 3) or setting not in (1, 2):
            raise ValueError(f"bad projector symbol {(party, setting)!r}")
    return word


def canonicalize_word(word) -> Word:
    """Stable-sort symbols by party, then collapse adjacent duplicates."""
    word = _check_word(word)
    ordered = sorted(word, key=lambda symbol: symbol[0])
    return tuple(symbol for symbol, _ in groupby(ordered))


def _reverse_canonical(word: Word) -> Word:
    return canonicalize_word(tuple(reversed(word)))


def _class_representative(word: Word) -> Word:
    """Moments of a word and its reverse are identified; the class is
    named by the lexicographically smaller of the two."""
    return min(word, _reverse_canonical(word))


def generate_words(level: str) -> list[Word]:
    """Canonical word list of a level, identity first.

    Q1 is the identity and the six single projectors; 1+AB adds the
    twelve cross-party pairs; AQ adds the eight one-per-party triples;
    Q2 instead adds to Q1 all length-2 canonical words (cross-party
    pairs plus, per party, both orders of its two settings).
    """
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; choose from {LEVELS}")
    singles: list[Word] = [((p, s),) for p in (1, 2, 3) for s in (1, 2)]
    cross_pairs: list[Word] = [
        ((p, s), (q, t))
        for p, q in ((1, 2), (1, 3), (2, 3))
        for s, t in product((1, 2), repeat=2)
    ]
    words: list[Word] = [()]
    words += singles
    if level == "Q1":
        return words
    if level == "Q2":
        same_pairs: list[Word] = [
            ((p, s), (p, 3 - s)) for p in (1, 2, 3) for s in (1, 2)
        ]
        return words + cross_pairs + same_pairs
    words += cross_pairs
    if level == "AQ":
        words += [
            ((1, s), (2, t), (3, u)) for s, t, u in product((1, 2), repeat=3)
        ]
    return words


def expand_correlator(term: tuple[int, int, int]) -> tuple[dict[Word, float], float]:
    """Expansion of a +-1 correlator term into projector moments.

    Each active party's observable is 2 Pi - 1; the product expands
    multilinearly into words over the active-party subsets. Returns the
    coefficients of the nonempty canonical words and the constant.
    """
    active = [party for party, t in enumerate(term) if t != 0]
    for t in term:
        if t not in (0, 1, 2):
            raise ValueError("term indices must lie in {0, 1, 2}")
    coeffs: dict[Word, float] = {}
    constant = 0.0
    for bits in product((0, 1), repeat=len(active)):
        weight = 1.0
        symbols = []
        for party, bit in zip(active, bits):
            if bit:
                weight *= 2.0
                symbols.append((party + 1, term[party]))
            else:
                weight *= -1.0
        if symbols:
            word = canonicalize_word(symbols)
            coeffs[word] = coeffs.get(word, 0.0) + weight
        else:
            constant += weight
    return coeffs, constant


@dataclass(frozen=True)
class MomentProblem:
    words: tuple[Word, ...]
    classes: dict[Word, tuple[int, ...]]
    objective: dict[Word, float]
    constant: float

    @property
    def size(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class SdpParams:
    max_iterations: int = 200000
    tolerance: float = 1e-8
    over_relaxation: float = 1.5
    penalty: float = 1.0
    adapt_interval: int = 100

    def __post_init__(self):
        if not 0.0 < self.over_relaxation < 2.0:
            raise ValueError("over_relaxation must lie in (0, 2)")
        if self.tolerance <= 0.0 or self.penalty <= 0.0:
            raise ValueError("tolerance and penalty must be positive")


@dataclass(frozen=True)
class SdpSolution:
    objective_value: float
    moment_values: dict[Word, float]
    primal_residual: float
    dual_residual: float
    iterations: int
    status: str
    gamma: np.ndarray = field(repr=False, compare=False, default=None)


def build_moment_problem(expr: BellExpression, level: str) -> MomentProblem:
    """Moment-matrix structure and objective of an expression at a level.

    Raises ValueError when some objective word is not the class of any
    matrix cell, i.e. the level cannot express the objective.
    """
    words = tuple(generate_words(level))
    classes: dict[Word, list[int]] = {}
    n = len(words)
    for i, u in enumerate(words):
        ru = tuple(reversed(u))
        for j, v in enumerate(words):
            rep = _class_representative(canonicalize_word(ru + v))
            classes.setdefault(rep, []).append(i * n + j)

    objective: dict[Word, float] = {}
    constant = 0.0
    for term, coeff in expr.coeffs.items():
        expansion, offset = expand_correlator(term)
        constant += coeff * offset
        for word, weight in expansion.items():
            rep = _class_representative(word)
            objective[rep] = objective.get(rep, 0.0) + coeff * weight
    objective = {word: w for word, w in objective.items() if w != 0.0}

    unreachable = sorted(word for word in objective if word not in classes)
    if unreachable:
        raise ValueError(
            f"objective words unreachable at level {level}: {unreachable}"
        )
    return MomentProblem(
        words=words,
        classes={rep: tuple(cells) for rep, cells in classes.items()},
        objective=objective,
        constant=constant,
    )


def sdp_maximize(problem: MomentProblem, params: SdpParams = SdpParams()) -> SdpSolution:
    """Maximize the objective over PSD moment matrices by ADMM splitting.

    X carries the affine structure (equal cells within a class, identity
    class pinned to 1), Z the PSD cone; both residuals must drop below
    params.tolerance for convergence.
    """
    n = problem.size
    reps = sorted(problem.classes)
    class_of = {rep: k for k, rep in enumerate(reps)}
    cell_class = np.empty(n * n, dtype=np.intp)
    for rep, cells in problem.classes.items():
        cell_class[list(cells)] = class_of[rep]
    counts = np.bincount(cell_class, minlength=len(reps)).astype(float)
    identity_cells = np.array(problem.classes.get((), ()), dtype=np.intp)

    weights = np.zeros(len(reps))
    for word, coeff in problem.objective.items():
        weights[class_of[word]] = coeff
    c = (weights / counts)[cell_class].reshape(n, n)

    def project_affine(m: np.ndarray) -> np.ndarray:
        means = np.bincount(cell_class, weights=m.ravel(), minlength=len(reps))
        means /= counts
        out = means[cell_class]
        out[identity_cells] = 1.0
        return out.reshape(n, n)

    def project_psd(m: np.ndarray) -> np.ndarray:
        vals, vecs = np.linalg.eigh(m)
        pos = vals > 0.0
        if not np.any(pos):
            return np.zeros_like(m)
        return (vecs[:, pos] * vals[pos]) @ vecs[:, pos].T

    rho = params.penalty
    alpha = params.over_relaxation
    z = project_affine(np.zeros((n, n)))
    u = np.zeros((n, n))
    primal = dual = np.inf
    iteration = 0
    for iteration in range(1, params.max_iterations + 1):
        x = project_affine(z - u + c / rho)
        x_relaxed = alpha * x + (1.0 - alpha) * z
        z_new = project_psd(x_relaxed + u)
        u += x_relaxed - z_new
        primal = float(np.linalg.norm(x - z_new))
        dual = float(rho * np.linalg.norm(z_new - z))
        z = z_new
        if primal < params.tolerance and dual < params.tolerance:
            break
        if iteration % params.adapt_interval == 0:
            if primal > 10.0 * dual:
                rho *= 2.0
                u /= 2.0
            elif dual > 10.0 * primal:
                rho /= 2.0
                u *= 2.0

    means = np.bincount(cell_class, weights=z.ravel(), minlength=len(reps))
    means /= counts
    moment_values = {rep: float(means[k]) for rep, k in class_of.items()}
    moment_values[()] = 1.0
    objective_value = float(weights @ means) + problem.constant
    converged = primal < params.tolerance and dual < params.tolerance
    return SdpSolution(
        objective_value=objective_value,
        moment_values=moment_values,
        primal_residual=primal,
        dual_residual=dual,
        iterations=iteration,
        status="converged" if converged else "max_iterations",
        gamma=z,
    )


def rigor_margin(problem: MomentProblem, solution: SdpSolution) -> float:
    """Safety margin on the sdp objective: 10 max(residuals) times the
    objective coefficient 1-norm."""
    margin = 10.0 * max(solution.primal_residual, solution.dual_residual)
    return margin * sum(abs(w) for w in problem.objective.values())


def npa_upper_bound(expr: BellExpression, level: str, params: SdpParams = SdpParams()) -> float:
    """Certified-style upper bound: sdp objective plus ``rigor_margin``."""
    problem = build_moment_problem(expr, level)
    solution = sdp_maximize(problem, params)
    if solution.status != "converged":
        raise RuntimeError(
            f"moment-matrix solve at level {level} hit the iteration cap "
            f"(residuals {solution.primal_residual:.2e}/{solution.dual_residual:.2e})"
        )
    return solution.objective_value + rigor_margin(problem, solution)
