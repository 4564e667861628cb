"""
Constrained quadratic models and their compilation to QUBO form.

A QuadraticModel holds binary and bounded-integer variables, a quadratic
objective and linear constraints (== and <=). to_qubo log-encodes integers
and inequality slacks, then adds one squared-residual penalty per
constraint to a dimod BinaryQuadraticModel whose variables are the bit
indices 0..n-1.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import dimod
import numpy as np

from ..models.data_models import ModelKind
from ..utils.error_handler import QuboEncodingError
from .blp_model import BlpModel
from .ilp_model import IlpModel

logger = logging.getLogger(__name__)

BINARY = "binary"
INTEGER = "integer"
EQ = "=="
LE = "<="

Label = Hashable


@dataclass(frozen=True)
class Variable:
    label: Label
    kind: str
    lower: int = 0
    upper: Optional[int] = 1

    @property
    def span(self) -> int:
        if self.upper is None:
            raise QuboEncodingError(f"integer variable {self.label} has no upper bound")
        return self.upper - self.lower


@dataclass(frozen=True)
class Constraint:
    """sum(coef * var) <sense> rhs."""
    terms: Tuple[Tuple[Label, int], ...]
    sense: str
    rhs: int
    label: Label


class QuadraticModel:
    """Variables, an objective (offset + linear + quadratic) and linear constraints."""

    def __init__(self, kind: Optional[ModelKind] = None, source: Any = None):
        self.kind = kind
        self.source = source
        self.variables: Dict[Label, Variable] = {}
        self.linear: Dict[Label, float] = {}
        self.quadratic: Dict[Tuple[Label, Label], float] = {}
        self.offset: float = 0
        self.constraints: List[Constraint] = []
        self._order: Dict[Label, int] = {}

    def add_binary(self, label: Label) -> Label:
        return self._add(Variable(label, BINARY, 0, 1))

    def add_integer(self, label: Label, lower: int = 0, upper: Optional[int] = None) -> Label:
        if upper is not None and lower > upper:
            raise QuboEncodingError(f"integer variable {label}: lower {lower} > upper {upper}")
        return self._add(Variable(label, INTEGER, lower, upper))

    def _add(self, variable: Variable) -> Label:
        if variable.label in self.variables:
            raise QuboEncodingError(f"variable {variable.label} defined twice")
        self._order[variable.label] = len(self._order)
        self.variables[variable.label] = variable
        return variable.label

    def _require(self, label: Label) -> None:
        if label not in self.variables:
            raise QuboEncodingError(f"unknown variable {label}")

    def add_linear(self, label: Label, bias: float) -> None:
        self._require(label)
        self.linear[label] = self.linear.get(label, 0) + bias

    def add_quadratic(self, u: Label, v: Label, bias: float) -> None:
        """Stored canonically: the key is ordered by variable creation order."""
        self._require(u)
        self._require(v)
        if u == v:
            raise QuboEncodingError(f"self-interaction on {u}; use add_linear for binaries")
        key = (u, v) if self._order[u] < self._order[v] else (v, u)
        self.quadratic[key] = self.quadratic.get(key, 0) + bias

    def add_constraint(self, terms: Iterable[Tuple[Label, int]], sense: str, rhs: int, label: Label) -> Constraint:
        if sense not in (EQ, LE):
            raise QuboEncodingError(f"constraint {label}: unsupported sense {sense!r}")
        merged: Dict[Label, int] = {}
        for var, coef in terms:
            self._require(var)
            merged[var] = merged.get(var, 0) + coef
        constraint = Constraint(tuple(merged.items()), sense, rhs, label)
        self.constraints.append(constraint)
        return constraint

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def objective_value(self, sample: Mapping[Label, int]) -> float:
        value = self.offset
        value += sum(bias * sample[v] for v, bias in self.linear.items())
        value += sum(bias * sample[u] * sample[v] for (u, v), bias in self.quadratic.items())
        return value

    def violations(self, sample: Mapping[Label, int]) -> List[Tuple[Label, int]]:
        """(constraint label, violation amount) for every violated row."""
        found = []
        for constraint in self.constraints:
            lhs = sum(coef * sample[var] for var, coef in constraint.terms)
            amount = abs(lhs - constraint.rhs) if constraint.sense == EQ else lhs - constraint.rhs
            if amount > 0:
                found.append((constraint.label, amount))
        return found

    def is_feasible(self, sample: Mapping[Label, int]) -> bool:
        return not self.violations(sample)


def _add_assignment_bits(qm: QuadraticModel, table: np.ndarray, reduced: bool) -> None:
    for pos, row in enumerate(table):
        base = int(row.min()) if reduced and row.size else 0
        qm.offset += base
        for j, cost in enumerate(row):
            qm.add_linear(qm.add_binary(("x", pos, j)), int(cost) - base)


def from_blp(model: BlpModel, reduced: bool = False) -> QuadraticModel:
    """
    One binary per (flight position, fleet); one-hot rows per flight and cap
    rows per day and fleet.

    With ``reduced`` each flight's cheapest cost is moved from its row into the
    offset, which leaves the objective unchanged wherever the one-hot rows hold.
    """
    instance = model.instance
    eta = instance.fleet_count
    qm = QuadraticModel(ModelKind.BLP, model)
    _add_assignment_bits(qm, model.effective_cost_matrix, reduced)

    for pos, flight in enumerate(instance.flights):
        qm.add_constraint(((("x", pos, j), 1) for j in range(eta)), EQ, 1, ("one_hot", flight.id))
    for day in instance.sorted_days:
        positions = instance.flights_on(day)
        for fleet in instance.fleets:
            qm.add_constraint(((("x", pos, fleet.id), 1) for pos in positions), LE, fleet.available,
                              ("fleet_cap", day, fleet.id))
    return qm


def from_ilp(model: IlpModel, materialize_grounded: bool = True, reduced: bool = False) -> QuadraticModel:
    """
    x binaries with one-hot and fleet-cap rows; with ``materialize_grounded``
    also the integer G and initial G0 variables (bounded by N_j), the balance
    rows and the initial-availability rows.
    """
    instance = model.instance
    qm = QuadraticModel(ModelKind.ILP, model)
    eta = model.fleet_count
    _add_assignment_bits(qm, model.effective_cost, reduced)

    for pos, flight_id in enumerate(model.flight_ids):
        qm.add_constraint(((("x", pos, j), 1) for j in range(eta)), EQ, 1, ("one_hot", flight_id))
    for j, cap in enumerate(model.fleet_caps):
        qm.add_constraint(((("x", pos, j), 1) for pos in range(len(model.flight_ids))), LE, cap, ("fleet_cap", j))

    if not materialize_grounded:
        return qm

    for airport, j in model.initial_vars:
        qm.add_integer(("G0", airport, j), 0, model.fleet_caps[j])
    for node, j in model.g_vars:
        qm.add_integer(("G", node, j), 0, model.fleet_caps[j])
    for node, j, previous, pos, sign in model.balance_rows():
        qm.add_constraint(
            [(previous, 1), (("x", pos, j), sign), (("G", node, j), -1)], EQ, 0, ("balance", node, j)
        )
    for j, cap in enumerate(model.fleet_caps):
        qm.add_constraint(
            ((("G0", airport, j), 1) for airport in model.network.airports), LE, cap,
            ("initial_availability", j),
        )
    logger.debug("ILP quadratic model for %d flights: %d variables, %d constraints",
                 len(instance.flights), qm.num_variables, qm.num_constraints)
    return qm


def encoding_weights(span: int) -> Tuple[int, ...]:
    """
    Bounded log encoding of [0, span]: weights 1, 2, ..., 2^(k-2) and a last
    weight span - (2^(k-1) - 1), k = ceil(log2(span + 1)).
    """
    if span < 0:
        raise QuboEncodingError(f"negative range {span}")
    k = span.bit_length()
    if k == 0:
        return ()
    return tuple(1 << b for b in range(k - 1)) + (span - ((1 << (k - 1)) - 1),)


def encode_value(offset: int, weights: Sequence[int]) -> List[int]:
    """Bits for ``offset`` in [0, sum(weights)]; the last bit is set only above 2^(k-1) - 1."""
    bits = [0] * len(weights)
    if not weights:
        return bits
    remaining = offset
    k = len(weights)
    if remaining > (1 << (k - 1)) - 1:
        bits[-1] = 1
        remaining -= weights[-1]
    for b in range(k - 1):
        bits[b] = (remaining >> b) & 1
    return bits


@dataclass(frozen=True)
class Encoding:
    lower: int
    bits: Tuple[int, ...]
    weights: Tuple[int, ...]

    def value(self, sample: np.ndarray) -> int:
        return self.lower + int(sum(w * int(sample[b]) for b, w in zip(self.bits, self.weights)))


@dataclass
class QuboForm:
    """
    Unconstrained binary form of a QuadraticModel.

    Bit i of ``bqm`` is labelled ``bit_labels[i]``: the model label for a
    binary, (label, b) for bit b of an integer, ("s", constraint label, b)
    for slack bits.
    """
    bqm: dimod.BinaryQuadraticModel
    bit_labels: Tuple[Label, ...]
    encodings: Dict[Label, Encoding]
    slack_encodings: Dict[Label, Encoding]
    penalty_weights: Dict[Label, float]
    model: QuadraticModel
    _index: Dict[Label, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {label: i for i, label in enumerate(self.bit_labels)}

    @property
    def num_bits(self) -> int:
        return len(self.bit_labels)

    @property
    def offset(self) -> float:
        return self.bqm.offset

    @property
    def linear(self) -> Dict[int, float]:
        return {v: self.bqm.get_linear(v) for v in range(self.num_bits)}

    @property
    def quadratic(self) -> Dict[Tuple[int, int], float]:
        """Upper-triangular interactions keyed (i, j) with i < j."""
        return {(min(u, v), max(u, v)): bias for (u, v), bias in self.bqm.quadratic.items()}

    def index_of(self, label: Label) -> int:
        return self._index[label]

    def coefficient(self, i: int, j: int) -> float:
        """Q[i, j]; symmetric, the diagonal holds the linear bias."""
        if i == j:
            return self.bqm.get_linear(i)
        return self.bqm.get_quadratic(i, j, default=0)

    def energy(self, bits: Sequence[int]) -> float:
        return self.bqm.energy({i: int(b) for i, b in enumerate(bits)})

    def decode(self, bits: Sequence[int]) -> Dict[Label, int]:
        """Model variable values for any bit vector."""
        sample = np.asarray(bits)
        return {label: enc.value(sample) for label, enc in self.encodings.items()}

    def encode(self, values: Mapping[Label, int]) -> np.ndarray:
        """
        Bits for a model sample; slack bits take the row's residual, clamped
        into the slack range when the row is violated.
        """
        bits = np.zeros(self.num_bits, dtype=np.int8)
        for label, enc in self.encodings.items():
            if enc.bits:
                bits[list(enc.bits)] = encode_value(values[label] - enc.lower, enc.weights)
        for constraint in self.model.constraints:
            enc = self.slack_encodings.get(constraint.label)
            if enc is None or not enc.bits:
                continue
            residual = constraint.rhs - sum(coef * values[v] for v, coef in constraint.terms)
            residual = min(max(residual - enc.lower, 0), sum(enc.weights))
            bits[list(enc.bits)] = encode_value(residual, enc.weights)
        return bits

    def to_matrix(self) -> np.ndarray:
        """Dense symmetric matrix M with bits' M bits == energy - offset."""
        size = self.num_bits
        matrix = np.zeros((size, size))
        for v in range(size):
            matrix[v, v] = self.bqm.get_linear(v)
        for (u, v), bias in self.bqm.quadratic.items():
            matrix[u, v] += bias / 2
            matrix[v, u] += bias / 2
        return matrix

    def write_qubo(self, path: Union[str, Path]) -> Path:
        """Lines `i j coef` (upper triangle, diagonal = linear) then `# offset <value>`."""
        path = Path(path)
        lines = []
        for v in range(self.num_bits):
            bias = self.bqm.get_linear(v)
            if bias != 0:
                lines.append(f"{v} {v} {bias:.12g}")
        for (u, v), bias in sorted(self.quadratic.items()):
            if bias != 0:
                lines.append(f"{u} {v} {bias:.12g}")
        lines.append(f"# offset {self.bqm.offset:.12g}")
        path.write_text("\n".join(lines) + "\n")
        return path


def _objective_spread(model: QuadraticModel) -> float:
    spread = sum(abs(bias) * model.variables[v].span for v, bias in model.linear.items())
    spread += sum(
        abs(bias) * model.variables[u].span * model.variables[v].span
        for (u, v), bias in model.quadratic.items()
    )
    return spread


def auto_penalty(model: QuadraticModel) -> float:
    """2 * (objective spread over the variable box) + 1, shared by every constraint."""
    return 2 * _objective_spread(model) + 1


def to_qubo(model: QuadraticModel, base_penalty: Optional[float] = None) -> QuboForm:
    """
    Compile ``model`` into a QuboForm.

    Equalities add P (c.v - r)^2; inequalities add P (c.v + s - r)^2 with a
    log-encoded slack s in [0, r - min c.v]. ``base_penalty`` overrides the
    automatic weight.
    """
    penalty = auto_penalty(model) if base_penalty is None else float(base_penalty)
    if not penalty > 0:
        raise QuboEncodingError(f"penalty weight must be > 0, got {penalty}")

    labels: List[Label] = []
    encodings: Dict[Label, Encoding] = {}
    for label, var in model.variables.items():
        if var.kind == BINARY:
            encodings[label] = Encoding(0, (len(labels),), (1,))
            labels.append(label)
            continue
        weights = encoding_weights(var.span)
        first = len(labels)
        labels.extend((label, b) for b in range(len(weights)))
        encodings[label] = Encoding(var.lower, tuple(range(first, first + len(weights))), weights)

    slack_encodings: Dict[Label, Encoding] = {}
    for constraint in model.constraints:
        if constraint.sense != LE:
            continue
        minimum = sum(min(coef * model.variables[v].lower, coef * model.variables[v].upper)
                      for v, coef in constraint.terms)
        room = constraint.rhs - minimum
        if room < 0:
            raise QuboEncodingError(f"constraint {constraint.label} can never hold (rhs {constraint.rhs} < {minimum})")
        weights = encoding_weights(int(room))
        first = len(labels)
        labels.extend(("s", constraint.label, b) for b in range(len(weights)))
        slack_encodings[constraint.label] = Encoding(0, tuple(range(first, first + len(weights))), weights)

    bqm = dimod.BinaryQuadraticModel(vartype=dimod.BINARY)
    bqm.add_variables_from((i, 0) for i in range(len(labels)))

    def expand(var_label: Label, coef: float):
        enc = encodings[var_label]
        return [(bit, coef * w) for bit, w in zip(enc.bits, enc.weights)], coef * enc.lower

    bqm.offset += model.offset
    for v, bias in model.linear.items():
        terms, constant = expand(v, bias)
        bqm.offset += constant
        for bit, coef in terms:
            bqm.add_linear(bit, coef)
    for (u, v), bias in model.quadratic.items():
        u_terms, u_const = expand(u, 1)
        v_terms, v_const = expand(v, 1)
        bqm.offset += bias * u_const * v_const
        for bit, coef in u_terms:
            bqm.add_linear(bit, bias * coef * v_const)
        for bit, coef in v_terms:
            bqm.add_linear(bit, bias * coef * u_const)
        for ub, uc in u_terms:
            for vb, vc in v_terms:
                bqm.add_quadratic(ub, vb, bias * uc * vc)

    penalty_weights: Dict[Label, float] = {}
    for constraint in model.constraints:
        terms: Dict[int, float] = {}
        constant = -constraint.rhs
        for v, coef in constraint.terms:
            bit_terms, offset = expand(v, coef)
            constant += offset
            for bit, c in bit_terms:
                terms[bit] = terms.get(bit, 0) + c
        slack = slack_encodings.get(constraint.label)
        if slack is not None:
            for bit, w in zip(slack.bits, slack.weights):
                terms[bit] = terms.get(bit, 0) + w
        penalty_weights[constraint.label] = penalty
        if not terms:
            if constant != 0:
                bqm.offset += penalty * constant * constant
            continue
        bqm.add_linear_equality_constraint(terms.items(), penalty, constant)

    logger.debug("QUBO compiled: %d bits, %d interactions, penalty %s", len(labels), bqm.num_interactions, penalty)
    return QuboForm(bqm, tuple(labels), encodings, slack_encodings, penalty_weights, model)


def write_qubo(qubo: QuboForm, path: Union[str, Path]) -> Path:
    return qubo.write_qubo(path)
