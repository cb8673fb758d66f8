"""Scenario specifications and realization sampling for coverage studies.

A scenario gives distributions for six variables, drawn in order with
dependent bounds: corpus size N, corpus prevalence pi, recall rec, precision
prec, and the two sample sizes n1 (retrieved) and n0 (unretrieved).  Each
distribution is a small arithmetic expression over earlier draws, e.g.::

    N    = uniform(1e3, 4e6)
    pi   = uniform(0.02, 0.8)
    rec  = uniform(0.1, 1.0)
    prec = uniform(max(0.1, 0.95*pi, 1.05*R1/N), 1.0)
    n1   = uniform(10, min(4000, floor(N1/10)))
    n0   = uniform(10, min(4000, floor(N0/10)))

Expressions may use the random primitives ``uniform(a, b)`` and
``int_uniform(a, b)`` (integers, inclusive), the functions ``min``, ``max``,
``floor``, ``log2``, and the progressively available variables
``N, pi, rec, prec, R, R1, N1, N0``.  Custom scenarios in this format load
from plain-text files with one ``name = expression`` line per variable.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from .core import RealizationTruth, SampleDesign
from .streams import RandomStream

__all__ = [
    "ScenarioSpec",
    "builtin_scenario",
    "load_scenario_config",
    "sample_realization",
    "sample_realization_with_variables",
    "BUILTIN_SCENARIOS",
]

VARIABLE_ORDER = ("N", "pi", "rec", "prec", "n1", "n0")

_MAX_RETRIES = 1000


class _InfeasibleDraw(Exception):
    """A drawn value left some later variable without a feasible range."""


@dataclass(frozen=True)
class ScenarioSpec:
    """Named distribution expressions for the six scenario variables."""

    name: str
    variables: Mapping[str, str]

    def __post_init__(self) -> None:
        missing = [v for v in VARIABLE_ORDER if v not in self.variables]
        if missing:
            raise ValueError(f"scenario {self.name!r} missing variables: {missing}")
        for var in self.variables:
            if var not in VARIABLE_ORDER:
                raise ValueError(f"scenario {self.name!r} has unknown variable {var!r}")
        for var in VARIABLE_ORDER:
            _compile_expression(self.variables[var])  # fail fast on bad syntax


# The tables print the dependent precision bound as min(...), but the
# accompanying constraints (retrieval at least as good as random; not all
# documents retrieved; at most half the corpus retrieved) and the printed
# variable ranges are only delivered by a max() lower bound.  Likewise the
# sample-size exponent caps print as max(...), which would break the printed
# 20..5120 / 100..12800 ranges; min() respects them.  The corrected forms are
# the default; literal_bounds=True reproduces the printed formulas verbatim.
_NEUTRAL = {
    "N": "uniform(1e3, 4e6)",
    "pi": "uniform(0.02, 0.8)",
    "rec": "uniform(0.1, 1.0)",
    "prec": "uniform(max(0.1, 0.95*pi, 1.05*R1/N), 1.0)",
    "n1": "uniform(10, min(4000, floor(N1/10)))",
    "n0": "uniform(10, min(4000, floor(N0/10)))",
}
_NEUTRAL_LITERAL = dict(_NEUTRAL, prec="uniform(min(0.1, 0.95*pi, 1.05*R1/N), 1.0)")

_LEGAL = {
    "N": "5e5 * 10 ** uniform(0, 2)",
    "pi": "2e-3 * 1.5 ** uniform(1, 10)",
    "rec": "2.5e-3 * uniform(1, 34) ** 1.65",
    "prec": "uniform(max(0.025, 2*R1/N), 0.92)",
    "n1": "20 * 2 ** int_uniform(0, min(8, floor(log2(N1/20))))",
    "n0": "100 * 2 ** int_uniform(0, min(7, floor(log2(N0/100))))",
}
_LEGAL_LITERAL = dict(
    _LEGAL,
    prec="uniform(min(0.025, 2*R1/N), 0.92)",
    n1="20 * 2 ** int_uniform(0, max(8, floor(log2(N1/20))))",
    n0="100 * 2 ** int_uniform(0, max(7, floor(log2(N0/100))))",
)

_SMALL = {
    "N": "uniform(1e3, 1e4)",
    "pi": "uniform(0.02, 0.22)",
    "rec": "uniform(0.1, 1.0)",
    "prec": "uniform(max(0.025, 2*R1/N), 0.92)",
    "n1": "N1 * uniform(0.2, 0.5)",
    "n0": "N0 * uniform(0.05, 0.3)",
}
_SMALL_LITERAL = dict(_SMALL, prec="uniform(min(0.025, 2*R1/N), 0.92)")

BUILTIN_SCENARIOS = ("neutral", "legal", "small")

_BUILTIN_TABLES = {
    ("neutral", False): _NEUTRAL,
    ("neutral", True): _NEUTRAL_LITERAL,
    ("legal", False): _LEGAL,
    ("legal", True): _LEGAL_LITERAL,
    ("small", False): _SMALL,
    ("small", True): _SMALL_LITERAL,
}


def builtin_scenario(name: str, literal_bounds: bool = False) -> ScenarioSpec:
    """One of the built-in scenarios: ``neutral``, ``legal``, or ``small``."""
    key = (name, literal_bounds)
    if key not in _BUILTIN_TABLES:
        raise ValueError(
            f"unknown scenario {name!r}; expected one of {BUILTIN_SCENARIOS}"
        )
    suffix = "-literal" if literal_bounds else ""
    return ScenarioSpec(name + suffix, _BUILTIN_TABLES[key])


def load_scenario_config(path) -> ScenarioSpec:
    """Load a custom scenario from a plain-text ``var = expression`` file."""
    variables: dict[str, str] = {}
    name = None
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected 'var = expression'")
            key, expr = line.split("=", 1)
            key = key.strip()
            expr = expr.strip()
            if key == "name":
                name = expr
                continue
            if key not in VARIABLE_ORDER:
                raise ValueError(
                    f"{path}: line {lineno}: unknown variable {key!r}; "
                    f"expected one of {VARIABLE_ORDER}"
                )
            if key in variables:
                raise ValueError(f"{path}: line {lineno}: duplicate variable {key!r}")
            variables[key] = expr
    import os

    return ScenarioSpec(name or os.path.splitext(os.path.basename(str(path)))[0], variables)


# ---------------------------------------------------------------------------
# Expression evaluation.
# ---------------------------------------------------------------------------

_BIN_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY_OPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def _safe_log2(value: float) -> float:
    if value <= 0.0:
        raise _InfeasibleDraw("log2 of a nonpositive value")
    return math.log2(value)


_PURE_FUNCTIONS = {"min": min, "max": max, "floor": math.floor, "log2": _safe_log2}
_RANDOM_FUNCTIONS = ("uniform", "int_uniform")


@lru_cache(maxsize=256)
def _compile_expression(text: str) -> ast.Expression:
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"bad scenario expression {text!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in (
                *_PURE_FUNCTIONS,
                *_RANDOM_FUNCTIONS,
            ):
                raise ValueError(f"bad scenario expression {text!r}: disallowed call")
        elif isinstance(node, ast.Name):
            if node.id not in ("N", "pi", "rec", "prec", "R", "R1", "N1", "N0") and node.id not in (
                *_PURE_FUNCTIONS,
                *_RANDOM_FUNCTIONS,
            ):
                raise ValueError(
                    f"bad scenario expression {text!r}: unknown name {node.id!r}"
                )
        elif not isinstance(
            node,
            (
                ast.Expression,
                ast.BinOp,
                ast.UnaryOp,
                ast.Constant,
                ast.Load,
                *(_BIN_OPS.keys()),
                *(_UNARY_OPS.keys()),
            ),
        ):
            raise ValueError(
                f"bad scenario expression {text!r}: disallowed syntax "
                f"({type(node).__name__})"
            )
        elif isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ValueError(f"bad scenario expression {text!r}: non-numeric constant")
    return tree


def _eval_node(node, env, gen):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, env, gen)
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise _InfeasibleDraw(f"variable {node.id!r} not yet drawn")
        return env[node.id]
    if isinstance(node, ast.BinOp):
        left = _eval_node(node.left, env, gen)
        right = _eval_node(node.right, env, gen)
        try:
            value = _BIN_OPS[type(node.op)](left, right)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise _InfeasibleDraw(str(exc)) from None
        if isinstance(value, complex):
            raise _InfeasibleDraw("expression produced a complex value")
        return value
    if isinstance(node, ast.UnaryOp):
        return _UNARY_OPS[type(node.op)](_eval_node(node.operand, env, gen))
    if isinstance(node, ast.Call):
        name = node.func.id
        args = [_eval_node(arg, env, gen) for arg in node.args]
        if name == "uniform":
            lo, hi = args
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
                raise _InfeasibleDraw(f"empty uniform range [{lo}, {hi}]")
            return lo + (hi - lo) * gen.random()
        if name == "int_uniform":
            lo, hi = int(math.floor(args[0])), int(math.floor(args[1]))
            if hi < lo:
                raise _InfeasibleDraw(f"empty integer range [{lo}, {hi}]")
            return float(gen.integers(lo, hi + 1))
        return _PURE_FUNCTIONS[name](*args)
    raise AssertionError(f"unreachable node {type(node).__name__}")


def _round_half_even(value: float) -> int:
    return int(round(value))


def _clamp(value: int, lo: int, hi: int) -> int:
    return max(lo, min(hi, value))


def _draw_once(spec: ScenarioSpec, gen) -> tuple[dict, RealizationTruth, SampleDesign]:
    env: dict[str, float] = {}
    variables: dict[str, float] = {}

    def draw(var: str) -> float:
        value = _eval_node(_compile_expression(spec.variables[var]), env, gen)
        if not math.isfinite(value):
            raise _InfeasibleDraw(f"{var} drew a non-finite value")
        variables[var] = value
        env[var] = value
        return value

    n_corpus = _round_half_even(draw("N"))
    if n_corpus < 2:
        raise _InfeasibleDraw("corpus must hold at least 2 documents")
    env["N"] = float(n_corpus)

    pi = draw("pi")
    if not 0.0 < pi < 1.0:
        raise _InfeasibleDraw("prevalence must lie in (0, 1)")
    yield_total = _round_half_even(n_corpus * pi)
    env["R"] = float(yield_total)

    rec = draw("rec")
    if not 0.0 < rec <= 1.0:
        raise _InfeasibleDraw("recall must lie in (0, 1]")
    yield_ret = _round_half_even(yield_total * rec)
    env["R1"] = float(yield_ret)

    prec = draw("prec")
    if not 0.0 < prec <= 1.0:
        raise _InfeasibleDraw("precision must lie in (0, 1]")
    n_ret = _clamp(_round_half_even(yield_ret / prec), yield_ret, n_corpus - 1)
    n_unret = n_corpus - n_ret
    yield_unret = _clamp(yield_total - yield_ret, 0, n_unret)
    if yield_ret + yield_unret < 1:
        raise _InfeasibleDraw("world holds no relevant documents")
    if n_ret < 1 or n_unret < 1:
        raise _InfeasibleDraw("degenerate segment")
    env["N1"] = float(n_ret)
    env["N0"] = float(n_unret)

    s_ret = _clamp(_round_half_even(draw("n1")), 1, n_ret)
    s_unret = _clamp(_round_half_even(draw("n0")), 1, n_unret)

    truth = RealizationTruth(n_ret, n_unret, yield_ret, yield_unret)
    design = SampleDesign(s_ret, s_unret)
    return variables, truth, design


def sample_realization_with_variables(
    spec: ScenarioSpec, rng: RandomStream
) -> tuple[dict, RealizationTruth, SampleDesign]:
    """As :func:`sample_realization`, also returning the raw variable draws."""
    gen = rng.generator()
    for _ in range(_MAX_RETRIES):
        try:
            return _draw_once(spec, gen)
        except _InfeasibleDraw:
            continue
    raise RuntimeError(
        f"scenario {spec.name!r} produced no feasible realization "
        f"in {_MAX_RETRIES} attempts"
    )


def sample_realization(
    spec: ScenarioSpec, rng: RandomStream
) -> tuple[RealizationTruth, SampleDesign]:
    """Draw one concrete world and sample design from a scenario.

    Variables are drawn in table order with dependent bounds, then
    integerized: total yield R = round(N * pi), retrieved yield
    R1 = round(R * rec), retrieved size N1 = round(R1 / prec) clamped to
    [R1, N - 1], with the remainder forming the unretrieved segment.  True
    recall is recomputed from the integer counts, and sample sizes are
    clamped to their segment sizes.  Draws that leave any later variable
    without a feasible range are rejected and redrawn, up to a bounded
    number of retries.
    """
    _, truth, design = sample_realization_with_variables(spec, rng)
    return truth, design
