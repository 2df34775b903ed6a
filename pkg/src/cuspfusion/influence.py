"""Who can be flipped by nudging b, by how much, and what fusion buys.

A bistable person whose occupied minimum has the opposite sign to ``a`` is
metastable: lowering b to the fold ``fold_boundary_b(a)`` annihilates that
minimum and the state jumps to the sign(a) branch. The opposite (aligned)
minimum exists for every b, so aligned people cannot be flipped through b.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Optional

from .cusp import MinimizerConfig, Stability, fold_boundary_b, is_bistable, local_minimum_from
from .errors import DegenerateParameters, InsufficientData
from .models import evaluate, independence_test
from .sampler import vote_probability


class Branch(str, Enum):
    ALIGNED = "aligned"
    METASTABLE = "metastable"
    MONOSTABLE_NEUTRAL = "monostable_neutral"
    NEUTRAL = "neutral"  # bistable with a == 0: no branch is preferred


@dataclass(frozen=True)
class SusceptibilityRecord:
    id: int
    branch: Branch
    delta_b_flip: Optional[float] = None
    flip_direction: Optional[str] = None
    on_degenerate: bool = False


@dataclass(frozen=True)
class InterventionResult:
    id: int
    new_b: float
    new_x: float
    new_p: float
    flipped: bool


def _sign(v):
    return (v > 0) - (v < 0)


def susceptibility(person, strict=True) -> SusceptibilityRecord:
    """Classify one person's branch and the b-reduction that would flip them.

    With ``strict=False`` a person exactly on the cusp curve yields a neutral
    record flagged ``on_degenerate`` instead of raising.
    """
    kind = is_bistable((person.a, person.b))
    if kind is Stability.DEGENERATE:
        if strict:
            raise DegenerateParameters(
                f"person {person.id}: (a={person.a!r}, b={person.b!r}) lies on the cusp curve"
            )
        return SusceptibilityRecord(person.id, Branch.NEUTRAL, on_degenerate=True)
    if kind is Stability.MONOSTABLE:
        return SusceptibilityRecord(person.id, Branch.MONOSTABLE_NEUTRAL)
    if person.a == 0:
        return SusceptibilityRecord(person.id, Branch.NEUTRAL)
    if _sign(person.x) == _sign(person.a):
        return SusceptibilityRecord(person.id, Branch.ALIGNED)
    return SusceptibilityRecord(
        person.id,
        Branch.METASTABLE,
        delta_b_flip=person.b - fold_boundary_b(person.a),
        flip_direction="to_1" if person.a > 0 else "to_0",
    )


def rank_targets(population):
    """Metastable people first (smallest delta_b_flip, then id), the rest by id."""
    records = [susceptibility(p, strict=False) for p in population]
    meta = sorted(
        (r for r in records if r.branch is Branch.METASTABLE),
        key=lambda r: (r.delta_b_flip, r.id),
    )
    rest = sorted((r for r in records if r.branch is not Branch.METASTABLE), key=lambda r: r.id)
    return meta + rest


def apply_intervention(person, new_b, cfg: MinimizerConfig = MinimizerConfig(), sigma=10.0):
    """Move b to ``new_b`` and let the state relax from where it is now.

    Re-minimising from the current x (not x0) gives hysteresis: the state
    keeps its branch until that branch's minimum ceases to exist.
    """
    new_x = local_minimum_from(person.x, (person.a, new_b), cfg)
    flipped = person.x != 0 and _sign(new_x) != _sign(person.x)
    return InterventionResult(person.id, float(new_b), new_x, vote_probability(new_x, sigma), flipped)


def hysteresis_path(person, b_values, cfg: MinimizerConfig = MinimizerConfig()):
    """Latent states along a sequence of b values, each step relaxing from the last."""
    x, path = person.x, []
    for b in b_values:
        x = local_minimum_from(x, (person.a, b), cfg)
        path.append(x)
    return path


@dataclass(frozen=True)
class FusionReport:
    metrics: dict
    deltas: dict
    independence: Optional[dict]
    targetable: Optional[dict]

    def to_dict(self):
        return {
            "metrics": {k: m.to_dict() for k, m in self.metrics.items()},
            "deltas": self.deltas,
            "independence": self.independence,
            "targetable": self.targetable,
        }


def _delta(m1, m2):
    return {
        "auc": m1.auc - m2.auc,
        "log_loss": m1.log_loss - m2.log_loss,
        "accuracy": m1.accuracy - m2.accuracy,
    }


def fusion_gain(joined, model_a, model_b, model_joint, records=None) -> FusionReport:
    """Compare the two single-database models with the joint one on ``joined``.

    ``records`` (from rank_targets) supplies the targetable head count; the
    joined table alone cannot reveal latent states.
    """
    metrics = {
        "a": evaluate(model_a, joined),
        "b": evaluate(model_b, joined),
        "joint": evaluate(model_joint, joined),
    }
    deltas = {
        "joint_minus_a": _delta(metrics["joint"], metrics["a"]),
        "joint_minus_b": _delta(metrics["joint"], metrics["b"]),
        "a_minus_b": _delta(metrics["a"], metrics["b"]),
    }
    try:
        stat, pval = independence_test(joined.column("b"), joined.column("y"))
        independence = {"statistic": stat, "p_value": pval, "dof": 9}
    except (InsufficientData, ValueError):
        independence = None
    targetable = None
    if records is not None:
        count = sum(r.branch is Branch.METASTABLE for r in records)
        targetable = {"count": count, "fraction": count / len(records) if records else 0.0}
    return FusionReport(metrics, deltas, independence, targetable)


def record_row(record: SusceptibilityRecord):
    d = asdict(record)
    d["branch"] = record.branch.value
    return d
