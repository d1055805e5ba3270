"""Exact finite-alphabet probability machinery.

All information measures are in bits. Joint distributions are plain numpy
arrays whose axes are the random variables, in the order named by the
function (``joint[x, y]`` for ``H(X|Y)``, ``joint[x, y, z]`` for
``I(X;Y|Z)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROB_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when a probability object violates its invariants."""


def _check_joint(joint: np.ndarray) -> np.ndarray:
    joint = np.asarray(joint, dtype=float)
    if np.any(joint < 0):
        raise ValidationError("joint has negative entries")
    if abs(joint.sum() - 1.0) > PROB_TOL:
        raise ValidationError(f"joint sums to {joint.sum()!r}, not 1")
    return joint


@dataclass(frozen=True, eq=False)
class Pmf:
    mass: np.ndarray

    def __post_init__(self):
        mass = np.array(self.mass, dtype=float).reshape(-1)
        if mass.size == 0:
            raise ValidationError("empty pmf")
        if np.any(mass < 0):
            raise ValidationError("pmf has negative mass")
        if abs(mass.sum() - 1.0) > PROB_TOL:
            raise ValidationError(f"pmf sums to {mass.sum()!r}, not 1")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @property
    def support_size(self) -> int:
        return self.mass.size

    def __eq__(self, other):
        return isinstance(other, Pmf) and np.array_equal(self.mass, other.mass)


@dataclass(frozen=True, eq=False)
class ConditionalPmf:
    """Row-stochastic kernel: ``rows[a, b] = P(B = b | A = a)``."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.size == 0:
            raise ValidationError("kernel must be a non-empty matrix")
        if np.any(rows < 0):
            raise ValidationError("kernel has negative entries")
        bad = np.abs(rows.sum(axis=1) - 1.0) > PROB_TOL
        if np.any(bad):
            raise ValidationError(f"kernel rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]

    def compose(self, other: "ConditionalPmf") -> "ConditionalPmf":
        """Kernel of ``A -> B -> C`` given ``self: A->B`` and ``other: B->C``."""
        if self.output_size != other.input_size:
            raise ValidationError("kernel sizes do not chain")
        out = self.rows @ other.rows
        # renormalize rounding only, the product of stochastic matrices is stochastic
        return ConditionalPmf(out / out.sum(axis=1, keepdims=True))

    def __eq__(self, other):
        return isinstance(other, ConditionalPmf) and np.array_equal(self.rows, other.rows)


@dataclass(frozen=True)
class LayeredDistribution:
    """Binary superposition law ``p(w) p(v|w) p(x|v)``.

    The Markov chain W -> V -> X holds by construction since X only sees V.
    """

    pw: Pmf
    pv_given_w: ConditionalPmf
    px_given_v: ConditionalPmf

    def __post_init__(self):
        if self.pw.support_size != 2:
            raise ValidationError("W must be binary")
        for name in ("pv_given_w", "px_given_v"):
            if getattr(self, name).rows.shape != (2, 2):
                raise ValidationError(f"{name} must be 2x2")

    @classmethod
    def from_params(cls, pw1: float, pv1_given_w: tuple[float, float], px1_given_v: tuple[float, float]):
        """Build from P(W=1), P(V=1|W=w) and P(X=1|V=v)."""
        a, b = pv1_given_w
        c, d = px1_given_v
        return cls(Pmf([1 - pw1, pw1]),
                   ConditionalPmf([[1 - a, a], [1 - b, b]]),
                   ConditionalPmf([[1 - c, c], [1 - d, d]]))

    def joint(self) -> np.ndarray:
        """``joint[w, v, x]``."""
        return (self.pw.mass[:, None, None]
                * self.pv_given_w.rows[:, :, None]
                * self.px_given_v.rows[None, :, :])


def _h(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).reshape(-1)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(p: Pmf | np.ndarray) -> float:
    if isinstance(p, Pmf):
        return _h(p.mass)
    return _h(_check_joint(p))


def binary_entropy(p: float) -> float:
    return _h(np.array([p, 1.0 - p]))


def conditional_entropy(joint: np.ndarray) -> float:
    """H(X|Y) for ``joint[x, y]``. Extra trailing axes are folded into Y."""
    joint = _check_joint(joint)
    joint = joint.reshape(joint.shape[0], -1)
    return _h(joint) - _h(joint.sum(axis=0))


def mutual_information(joint: np.ndarray) -> float:
    """I(X;Y) for ``joint[x, y]``, clipped at zero below a 1e-12 floor."""
    joint = _check_joint(joint)
    joint = joint.reshape(joint.shape[0], -1)
    val = _h(joint.sum(axis=1)) + _h(joint.sum(axis=0)) - _h(joint)
    return max(val, 0.0) if val > -PROB_TOL else val


def conditional_mutual_information(joint: np.ndarray) -> float:
    """I(X;Y|Z) for ``joint[x, y, z]``."""
    joint = _check_joint(joint)
    if joint.ndim != 3:
        raise ValidationError("expected a 3-way joint")
    pz = joint.sum(axis=(0, 1))
    val = (_h(joint.sum(axis=1)) + _h(joint.sum(axis=0)) - _h(joint) - _h(pz))
    return max(val, 0.0) if val > -PROB_TOL else val


def bhattacharyya(joint: np.ndarray) -> float:
    """Z(X|Y) = 2 sum_y P(y) sqrt(P(0|y) P(1|y)) for binary X.

    Written with the joint directly: 2 sum_y sqrt(P(0,y) P(1,y)).
    """
    joint = _check_joint(joint)
    if joint.shape[0] != 2:
        raise ValidationError("Bhattacharyya parameter needs a binary X")
    joint = joint.reshape(2, -1)
    return float(min(1.0, 2.0 * np.sqrt(joint[0] * joint[1]).sum()))


def tv_distance(p: Pmf | np.ndarray, q: Pmf | np.ndarray) -> float:
    pm = p.mass if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    qm = q.mass if isinstance(q, Pmf) else np.asarray(q, dtype=float)
    if pm.shape != qm.shape:
        raise ValidationError(f"support mismatch: {pm.shape} vs {qm.shape}")
    return float(0.5 * np.abs(pm - qm).sum())


def kl_divergence(p: Pmf | np.ndarray, q: Pmf | np.ndarray) -> float:
    """D(p||q) in bits; infinite when p is not absolutely continuous w.r.t. q."""
    pm = p.mass if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    qm = q.mass if isinstance(q, Pmf) else np.asarray(q, dtype=float)
    if pm.shape != qm.shape:
        raise ValidationError(f"support mismatch: {pm.shape} vs {qm.shape}")
    m = pm > 0
    if np.any(qm[m] == 0):
        return float("inf")
    return float((pm[m] * np.log2(pm[m] / qm[m])).sum())


def tv_channel_extension_identity(px: Pmf, qx: Pmf, channel: ConditionalPmf) -> tuple[float, float]:
    """TV of the two joints built with a shared channel, and TV of the inputs.

    Pushing both input laws through the same kernel leaves their total
    variation unchanged, so the two returned values agree.
    """
    if channel.input_size != px.support_size or px.support_size != qx.support_size:
        raise ValidationError("channel input size does not match the input supports")
    pj = px.mass[:, None] * channel.rows
    qj = qx.mass[:, None] * channel.rows
    return tv_distance(pj.reshape(-1), qj.reshape(-1)), tv_distance(px, qx)
