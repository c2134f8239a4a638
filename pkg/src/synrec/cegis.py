"""Counterexample-guided inductive synthesis over the finite control space.

The inductive step is a deterministic, complete backtracking search with
lazy binding: control points are bound to their first domain value when
evaluation first reads them, and backtracking advances the most recently
bound point that still has untried values.  Verification is exhaustive
bounded checking over depth-major enumerated inputs, so the first
counterexample found is depth-minimal; total candidates are checked
through the compiled fast path.

When inductive decomposition produced a morphism, switch arms of the
function under synthesis share no control points with each other, so the
inductive step solves each arm against only the counterexamples rooted at
its variant and caches arm solutions across iterations.  A safety recheck
(and a read-set disjointness check) falls back to the joint search if the
decoupling assumption ever fails, preserving completeness.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field, replace

from .ast import (
    AdtType,
    AlwaysFail,
    ArrayLit,
    Assert,
    BoxMake,
    Call,
    Choice,
    Expr,
    FieldsOf,
    FlexSwitch,
    FuncDecl,
    GenLambda,
    Hole,
    If,
    Index,
    IntLit,
    Let,
    PrimType,
    SurfaceProgram,
    TypeExpr,
    UnitLit,
    UnknownCtor,
    Var,
    children,
    rebuild,
    walk,
)
from .compiled import CAssertFail, CExhausted, CInfeasible, compile_concrete
from .errors import InternalError, SynrecError
from .evaluator import (
    EvalLimits,
    Outcome,
    VRecord,
    evaluate_harness,
    format_value,
)
from .expand import ControlPoint, ExpandedProgram, ExpansionContext
from .indecomp import (
    OTHER,
    ClassificationReport,
    SpecShape,
    apply_inductive_decomposition,
)
from .typesys import TypeEnv, check_type

log = logging.getLogger("synrec")


@dataclass(frozen=True)
class SynthesisConfig:
    """Bounds and knobs for one synthesis run; all defaults are the
    smallest values at which the running example is distinguishable."""

    input_depth: int = 3
    int_domain: tuple[int, ...] = (0, 1, 2)
    hole_lo: int = 0
    hole_hi: int = 3
    inline_bound: int = 3
    # None: interpreters get input_depth + 2 frames (at least 5), so they can
    # always consume fully enumerated inputs.
    unroll_depth: int | None = None
    max_steps: int = 2_000_000
    timeout_secs: float = 300.0
    seed: int = 0  # reserved: the search has no randomized tie-breaking
    indecomp: bool = True
    compiled_verify: bool = True

    def __post_init__(self):
        if self.input_depth <= 0 or self.inline_bound <= 0:
            raise ValueError("bounds must be positive")
        if self.unroll_depth is not None and self.unroll_depth <= 0:
            raise ValueError("bounds must be positive")
        if not self.int_domain:
            raise ValueError("int domain must be non-empty")
        if self.hole_hi < self.hole_lo:
            raise ValueError("hole domain must be non-empty")

    @property
    def effective_unroll(self) -> int:
        if self.unroll_depth is not None:
            return self.unroll_depth
        return max(5, self.input_depth + 2)

    def expansion_context(self) -> ExpansionContext:
        return ExpansionContext(
            inline_bound=self.inline_bound,
            hole_lo=self.hole_lo,
            hole_hi=self.hole_hi,
            unroll_depth=self.effective_unroll,
        )

    def eval_limits(self) -> EvalLimits:
        return EvalLimits(max_depth=self.effective_unroll, max_steps=self.max_steps)


class SynthesisTimeout(Exception):
    pass


# ---------------------------------------------------------------------------
# Bounded-depth value enumeration


def _ref_record(variant, labels, fields):
    return VRecord(variant, dict(zip(labels, fields)))


def _native_record(variant, labels, fields):
    return (variant,) + tuple(fields)


class Enumerator:
    """Depth-major enumeration of values, with per-level caching so deep
    levels share substructure with shallow ones."""

    def __init__(self, program: SurfaceProgram, cfg: SynthesisConfig, record=_ref_record):
        self.program = program
        self.cfg = cfg
        self.record = record
        self._exact: dict[tuple, list] = {}

    def exact(self, ty: TypeExpr, depth: int) -> list:
        key = (ty, depth)
        cached = self._exact.get(key)
        if cached is None:
            cached = list(self.iter_exact(ty, depth))
            self._exact[key] = cached
        return cached

    def iter_exact(self, ty: TypeExpr, depth: int):
        """Values of `ty` whose constructor-nesting depth is exactly `depth`.

        Primitive leaves have depth 0; a record is one deeper than its
        deepest field, so `NumS(v = 0)` sits at depth 1.
        """
        if isinstance(ty, PrimType):
            if depth == 0:
                if ty.name == "bit":
                    yield 0
                    yield 1
                else:
                    yield from self.cfg.int_domain
            return
        if depth < 1:
            return
        if not isinstance(ty, AdtType):
            raise SynrecError(f"cannot enumerate values of type {ty}")
        adt = self.program.adt(ty.name)
        if adt is None:
            raise SynrecError(f"cannot enumerate values of unknown type {ty}")
        for variant in adt.variants:
            labels = tuple(l for l, _ in variant.fields)
            ftys = tuple(t for _, t in variant.fields)
            if not ftys:
                if depth == 1:
                    yield self.record(variant.name, labels, ())
                continue
            child_depth = depth - 1
            pools = []
            shallow = []
            for ft in ftys:
                # cumulative depth-major pool; the entries below child_depth
                # form a prefix, so "some child at max depth" is an index test
                pool: list = []
                for d in range(0, child_depth):
                    pool.extend(self.exact(ft, d))
                shallow.append(len(pool))
                pool.extend(self.exact(ft, child_depth))
                pools.append(pool)
            if any(not p for p in pools):
                continue
            yield from self._combos(variant.name, labels, pools, shallow)

    def _combos(self, name: str, labels, pools, shallow):
        """Product of pools, skipping combinations where every component is
        shallow; same sequence as filtering the plain product."""
        record = self.record
        if len(pools) == 1:
            for v in pools[0][shallow[0]:]:
                yield record(name, labels, (v,))
            return
        if len(pools) == 2:
            p0, p1 = pools
            s1 = shallow[1]
            deep1 = p1[s1:]
            for i0, v0 in enumerate(p0):
                inner = p1 if i0 >= shallow[0] else deep1
                for v1 in inner:
                    yield record(name, labels, (v0, v1))
            return
        if len(pools) == 3:
            p0, p1, p2 = pools
            s0, s1, s2 = shallow
            deep2 = p2[s2:]
            for i0, v0 in enumerate(p0):
                d0 = i0 >= s0
                for i1, v1 in enumerate(p1):
                    inner = p2 if d0 or i1 >= s1 else deep2
                    for v2 in inner:
                        yield record(name, labels, (v0, v1, v2))
            return
        for combo in itertools.product(*(list(enumerate(p)) for p in pools)):
            if any(i >= s for (i, _), s in zip(combo, shallow)):
                yield record(name, labels, tuple(v for _, v in combo))

    def iter_cumulative(self, ty: TypeExpr, depth: int):
        """All values up to `depth`, depth-major; the deepest level streams."""
        if isinstance(ty, PrimType):
            yield from self.iter_exact(ty, 0)
            return
        for d in range(1, depth):
            yield from self.exact(ty, d)
        yield from self.iter_exact(ty, depth)

    def count(self, ty: TypeExpr, depth: int) -> int:
        if isinstance(ty, PrimType):
            return 2 if ty.name == "bit" else len(self.cfg.int_domain)
        return sum(len(self.exact(ty, d)) for d in range(1, depth + 1))


def enumerate_values(
    program: SurfaceProgram, ty: TypeExpr, depth: int, cfg: SynthesisConfig
) -> list:
    """All values of `ty` with constructor-nesting depth <= `depth`,
    depth-major then declaration-order, duplicate-free."""
    return list(Enumerator(program, cfg).iter_cumulative(ty, depth))


def iter_inputs(
    program: SurfaceProgram, harness: FuncDecl, cfg: SynthesisConfig, record=_ref_record
):
    """Joint enumeration of harness arguments, ordered by max parameter depth."""
    en = Enumerator(program, cfg, record)
    ptys = [t for _, t in harness.params]
    if not ptys:
        yield ()
        return
    if len(ptys) == 1:
        for v in en.iter_cumulative(ptys[0], cfg.input_depth):
            yield (v,)
        return
    # Joint depth ordering over ADT-typed parameters; primitive parameters
    # contribute their (depth-independent) domains at every level.
    adt_slots = [i for i, t in enumerate(ptys) if not isinstance(t, PrimType)]
    prim_pools = {
        i: en.exact(t, 0) for i, t in enumerate(ptys) if isinstance(t, PrimType)
    }
    if not adt_slots:
        yield from itertools.product(*(prim_pools[i] for i in range(len(ptys))))
        return
    for total in range(1, cfg.input_depth + 1):
        for dvec in itertools.product(range(1, total + 1), repeat=len(adt_slots)):
            if max(dvec) != total:
                continue
            pools = []
            slot_depth = dict(zip(adt_slots, dvec))
            for i, t in enumerate(ptys):
                pools.append(prim_pools[i] if i in prim_pools else en.exact(t, slot_depth[i]))
            if any(not p for p in pools):
                continue
            yield from itertools.product(*pools)


# ---------------------------------------------------------------------------
# Lazy-binding backtracking search


class LazyBinder:
    """Binds control points in first-read order; `advance` flips the most
    recent point with untried values and discards later bindings."""

    __slots__ = ("space", "bound", "trail", "ever_read")

    def __init__(self, space: tuple[ControlPoint, ...]):
        self.space = space
        self.bound: dict[int, int] = {}
        self.trail: list[int] = []
        self.ever_read: set[int] = set()

    def read(self, cp: int) -> int:
        v = self.bound.get(cp)
        if v is None:
            v = self.space[cp].lo
            self.bound[cp] = v
            self.trail.append(cp)
            self.ever_read.add(cp)
        return v

    def advance(self) -> bool:
        while self.trail:
            cp = self.trail[-1]
            if self.bound[cp] < self.space[cp].hi:
                self.bound[cp] += 1
                return True
            self.trail.pop()
            del self.bound[cp]
        return False


def total_assignment(
    space: tuple[ControlPoint, ...], partial: dict[int, int]
) -> dict[int, int]:
    """Complete a partial assignment with first-domain-value defaults."""
    return {p.id: partial.get(p.id, p.lo) for p in space}


@dataclass
class _Stats:
    candidate_evaluations: int = 0


def _search(
    expanded: ExpandedProgram,
    cexs: list[dict],
    cfg: SynthesisConfig,
    decomp,
    deadline: float | None,
    stats: _Stats,
    harness: FuncDecl,
) -> LazyBinder | None:
    """Complete deterministic search over assignments reachable by reads."""
    binder = LazyBinder(expanded.control_space)
    limits = cfg.eval_limits()
    if not cexs:
        return binder
    while True:
        if deadline is not None and time.monotonic() > deadline:
            raise SynthesisTimeout
        ok = True
        for sigma in cexs:
            out = evaluate_harness(
                expanded.program, binder, sigma, limits, decomposition=decomp,
                harness=harness,
            )
            stats.candidate_evaluations += 1
            if not out.passed:
                ok = False
                break
        if ok:
            return binder
        if not binder.advance():
            return None


def synthesize_inductive(
    expanded: ExpandedProgram,
    cexs: list[dict],
    cfg: SynthesisConfig,
    decomp: SpecShape | None = None,
    deadline: float | None = None,
    stats: _Stats | None = None,
    harness: FuncDecl | None = None,
) -> dict[int, int] | None:
    """Find a total control assignment satisfying every counterexample,
    or None when the (finite) space has no solution."""
    stats = stats if stats is not None else _Stats()
    harness = harness or expanded.program.harnesses[0]
    binder = _search(expanded, cexs, cfg, decomp, deadline, stats, harness)
    if binder is None:
        return None
    return total_assignment(expanded.control_space, binder.bound)


# ---------------------------------------------------------------------------
# Bounded exhaustive verification


@dataclass
class VerifyResult:
    passed: bool
    counterexample: dict | None = None
    failure: Outcome | None = None
    evaluations: int = 0


_CHUNK = 65536


def verify(
    expanded: ExpandedProgram,
    phi: dict[int, int],
    cfg: SynthesisConfig,
    decomp: SpecShape | None = None,
    deadline: float | None = None,
) -> VerifyResult:
    """Exhaustive bounded check of a total assignment, in enumeration order.

    Returns the first failing input (depth-minimal by construction).
    Candidate-infeasible and resource outcomes count as failures.
    """
    harness = expanded.program.harnesses[0]
    limits = cfg.eval_limits()
    if len(phi) != len(expanded.control_space):
        phi = total_assignment(expanded.control_space, phi)
    if cfg.compiled_verify:
        return _verify_compiled(expanded, phi, cfg, decomp, deadline, harness, limits)
    evals = 0
    for args in iter_inputs(expanded.program, harness, cfg):
        if deadline is not None and evals % _CHUNK == 0 and time.monotonic() > deadline:
            raise SynthesisTimeout
        sigma = {n: v for (n, _), v in zip(harness.params, args)}
        out = evaluate_harness(
            expanded.program, phi, sigma, limits, decomposition=decomp, harness=harness
        )
        evals += 1
        if not out.passed:
            return VerifyResult(False, sigma, out, evals)
    return VerifyResult(True, evaluations=evals)


def _verify_compiled(expanded, phi, cfg, decomp, deadline, harness, limits):
    concrete = substitute_controls(expanded, phi, unbox=False)
    prog = compile_concrete(
        concrete, shape=decomp, max_depth=limits.max_depth, memoize=True
    )
    runner = prog.func(harness.name)
    evals = 0
    failed_at = -1
    failure: Outcome | None = None
    for args in iter_inputs(concrete, harness, cfg, record=_native_record):
        if evals % _CHUNK == 0:
            prog.clear_memos()
            if deadline is not None and time.monotonic() > deadline:
                raise SynthesisTimeout
        try:
            runner(*args)
        except CAssertFail as f:
            failed_at = evals
            failure = Outcome("assert_failed", assert_id=f.aid)
        except (CInfeasible, IndexError):
            # IndexError comes from statically-indexed array literals going
            # out of bounds, the compiled form of an infeasible candidate.
            failed_at = evals
            failure = Outcome("infeasible", detail="candidate infeasible")
        except CExhausted:
            failed_at = evals
            failure = Outcome("resource", detail="recursion depth")
        evals += 1
        if failed_at >= 0:
            break
    if failed_at < 0:
        return VerifyResult(True, evaluations=evals)
    ref_args = next(
        itertools.islice(iter_inputs(expanded.program, harness, cfg), failed_at, None)
    )
    sigma = {n: v for (n, _), v in zip(harness.params, ref_args)}
    return VerifyResult(False, sigma, failure, evals)


# ---------------------------------------------------------------------------
# Concretization


def substitute_controls(
    expanded: ExpandedProgram, phi: dict[int, int], unbox: bool
) -> SurfaceProgram:
    """Replace holes by literals and choices by their selected arm."""

    def go(e: Expr) -> Expr:
        if isinstance(e, Hole):
            return IntLit(phi[e.cp], span=e.span)
        if isinstance(e, Choice):
            return go(e.arms[phi[e.cp]])
        if isinstance(e, BoxMake) and unbox:
            args = (go(e.term),) if e.gamma is None else (go(e.term), go(e.gamma))
            return Call(e.trans, args, span=e.span)
        return rebuild(e, [go(c) for c in children(e)])

    funcs = tuple(replace(f, body=go(f.body)) for f in expanded.functions)
    return SurfaceProgram(expanded.program.adts, funcs)


def _is_pure(e: Expr) -> bool:
    """Conservatively pure: dropping it cannot change observable outcomes."""
    return not any(
        isinstance(n, (Call, Index, Assert, AlwaysFail, BoxMake, Hole, Choice))
        for n in walk(e)
    )


def simplify_expr(e: Expr) -> Expr:
    out = rebuild(e, [simplify_expr(c) for c in children(e)])
    if isinstance(out, If) and isinstance(out.cond, IntLit):
        return out.then if out.cond.value != 0 else out.els
    if isinstance(out, Index) and isinstance(out.base, ArrayLit) and isinstance(out.index, IntLit):
        items = out.base.items
        k = out.index.value
        if 0 <= k < len(items) and all(_is_pure(x) for i, x in enumerate(items) if i != k):
            return items[k]
    if isinstance(out, Let):
        if out.name == "_" and isinstance(out.value, UnitLit):
            return out.body
        used = any(isinstance(n, Var) and n.name == out.name for n in walk(out.body))
        if not used and out.name != "_" and _is_pure(out.value):
            return out.body
    return out


_CONCRETE_FORBIDDEN = (Hole, Choice, BoxMake, GenLambda, FieldsOf, FlexSwitch, UnknownCtor)


def concretize(expanded: ExpandedProgram, phi: dict[int, int]) -> SurfaceProgram:
    """Substitute a total assignment and clean up the result.

    The output contains only standard expressions, type-checks at every
    declared signature, and keeps let bindings whose values could have
    observable effects.
    """
    if len(phi) != len(expanded.control_space):
        phi = total_assignment(expanded.control_space, phi)
    program = substitute_controls(expanded, phi, unbox=True)
    funcs = tuple(replace(f, body=simplify_expr(f.body)) for f in program.functions)
    out = SurfaceProgram(program.adts, funcs)
    for f in out.functions:
        for node in walk(f.body):
            if isinstance(node, _CONCRETE_FORBIDDEN):
                raise InternalError(
                    f"concretize left a {type(node).__name__} node in {f.name!r}"
                )
        env = TypeEnv(out)
        for pname, pty in f.params:
            env = env.bind(pname, pty)
        check_type(env, f.body, f.ret)
    return out


# ---------------------------------------------------------------------------
# The CEGIS loop


@dataclass
class ArmStatus:
    variant: str
    solved: bool
    ms: float = 0.0


@dataclass
class CegisState:
    counterexamples: list[dict] = field(default_factory=list)
    cex_keys: set[str] = field(default_factory=set)
    iterations: int = 0
    candidate_history: list[dict] = field(default_factory=list)
    arm_cache: dict[str, dict[int, int]] = field(default_factory=dict)
    arm_reads: dict[str, set[int]] = field(default_factory=dict)
    arm_cex_count: dict[str, int] = field(default_factory=dict)
    arm_ms: dict[str, float] = field(default_factory=dict)
    arm_solved: dict[str, bool] = field(default_factory=dict)


@dataclass
class SynthesisStats:
    iterations: int = 0
    candidate_evaluations: int = 0
    counterexamples: list[str] = field(default_factory=list)
    wall_ms: int = 0
    per_arm: list[ArmStatus] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "candidate_evaluations": self.candidate_evaluations,
            "counterexamples": list(self.counterexamples),
            "wall_ms": self.wall_ms,
            "per_arm": [
                {"variant": a.variant, "solved": a.solved, "ms": round(a.ms, 3)}
                for a in self.per_arm
            ],
        }


SOLVED = "solved"
UNSAT = "unsat"
TIMEOUT = "timeout"


@dataclass
class SynthesisResult:
    status: str
    assignment: dict[int, int] | None
    solution: SurfaceProgram | None
    stats: SynthesisStats

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


def _sigma_key(sigma: dict) -> str:
    return ";".join(f"{k}={format_value(v)}" for k, v in sorted(sigma.items()))


def _root_variant(sigma: dict, shape: SpecShape) -> str:
    v = sigma[shape.ast_param]
    if not isinstance(v, VRecord):
        raise InternalError("inductive input is not an ADT value")
    return v.variant


def _solve_per_arm(
    expanded: ExpandedProgram,
    cfg: SynthesisConfig,
    shape: SpecShape,
    state: CegisState,
    deadline: float | None,
    stats: _Stats,
    harness: FuncDecl,
) -> dict[int, int] | None | str:
    """Per-arm inductive step; returns phi, None (unsat), or "fallback"."""
    adt = expanded.program.adt(shape.source_adt)
    groups: dict[str, list[dict]] = {}
    for sigma in state.counterexamples:
        groups.setdefault(_root_variant(sigma, shape), []).append(sigma)
    limits = cfg.eval_limits()
    for variant in (v.name for v in adt.variants):
        cexs = groups.get(variant, [])
        if not cexs:
            state.arm_solved.setdefault(variant, True)
            continue
        if state.arm_cex_count.get(variant) == len(cexs) and variant in state.arm_cache:
            continue
        start = time.monotonic()
        binder = LazyBinder(expanded.control_space)
        solved = None
        while True:
            if deadline is not None and time.monotonic() > deadline:
                state.arm_ms[variant] = state.arm_ms.get(variant, 0.0) + (
                    (time.monotonic() - start) * 1000
                )
                raise SynthesisTimeout
            ok = True
            for sigma in cexs:
                out = evaluate_harness(
                    expanded.program, binder, sigma, limits,
                    decomposition=shape, harness=harness,
                )
                stats.candidate_evaluations += 1
                if not out.passed:
                    ok = False
                    break
            if ok:
                solved = dict(binder.bound)
                break
            if not binder.advance():
                break
        state.arm_ms[variant] = state.arm_ms.get(variant, 0.0) + (
            (time.monotonic() - start) * 1000
        )
        state.arm_cex_count[variant] = len(cexs)
        state.arm_reads[variant] = set(binder.ever_read)
        if solved is None:
            state.arm_solved[variant] = False
            # Unsat for this arm is global unsat only if its reads are
            # independent of every other arm's.
            for other, reads in state.arm_reads.items():
                if other != variant and reads & binder.ever_read:
                    return "fallback"
            return None
        state.arm_cache[variant] = solved
        state.arm_solved[variant] = True
    # disjointness of final solutions
    seen: dict[int, str] = {}
    for variant, frag in state.arm_cache.items():
        for cp in frag:
            if cp in seen and seen[cp] != variant:
                return "fallback"
            seen[cp] = variant
    merged: dict[int, int] = {}
    for frag in state.arm_cache.values():
        merged.update(frag)
    phi = total_assignment(expanded.control_space, merged)
    for sigma in state.counterexamples:
        out = evaluate_harness(
            expanded.program, phi, sigma, limits, decomposition=shape, harness=harness
        )
        stats.candidate_evaluations += 1
        if not out.passed:
            return "fallback"
    return phi


def run_cegis(
    expanded: ExpandedProgram,
    cfg: SynthesisConfig,
    shape: SpecShape | None = None,
    report: ClassificationReport | None = None,
) -> SynthesisResult:
    """The CEGIS loop: inductive synthesis against accumulated
    counterexamples, bounded verification, repeat."""
    start = time.monotonic()
    deadline = start + cfg.timeout_secs
    stats = _Stats()
    state = CegisState()
    harness = expanded.program.harnesses[0] if expanded.program.harnesses else None
    if harness is None:
        raise SynrecError("program has no harness")

    decomp_active = (
        cfg.indecomp
        and shape is not None
        and report is not None
        and report.verdict != OTHER
    )
    if decomp_active:
        search_prog = apply_inductive_decomposition(expanded, shape, report)
        decomp: SpecShape | None = shape
    else:
        search_prog = expanded
        decomp = None
    per_arm = decomp_active and report.is_morphism

    def finish(status, assignment, solution) -> SynthesisResult:
        s = SynthesisStats(
            iterations=state.iterations,
            candidate_evaluations=stats.candidate_evaluations,
            counterexamples=[_sigma_key(c) for c in state.counterexamples],
            wall_ms=int((time.monotonic() - start) * 1000),
        )
        if per_arm:
            adt = expanded.program.adt(shape.source_adt)
            s.per_arm = [
                ArmStatus(
                    v.name,
                    state.arm_solved.get(v.name, False),
                    state.arm_ms.get(v.name, 0.0),
                )
                for v in adt.variants
            ]
        return SynthesisResult(status, assignment, solution, s)

    def drop_decomposition():
        nonlocal per_arm, search_prog, decomp
        per_arm = False
        search_prog = expanded
        decomp = None
        state.arm_cache.clear()
        state.arm_cex_count.clear()

    try:
        while True:
            state.iterations += 1
            if per_arm:
                got = _solve_per_arm(
                    search_prog, cfg, shape, state, deadline, stats, harness
                )
                if got == "fallback":
                    log.warning("per-arm decoupling failed; falling back to joint solve")
                    per_arm = False
                    got = synthesize_inductive(
                        search_prog, state.counterexamples, cfg, decomp, deadline,
                        stats, harness,
                    )
            else:
                got = synthesize_inductive(
                    search_prog, state.counterexamples, cfg, decomp, deadline,
                    stats, harness,
                )
            if got is None and decomp is not None:
                # Near the resource limits the decomposed and plain semantics
                # can diverge; an unsat claim must come from the semantics the
                # verifier uses.
                log.warning("decomposed search exhausted; re-running plain search")
                drop_decomposition()
                got = synthesize_inductive(
                    search_prog, state.counterexamples, cfg, None, deadline,
                    stats, harness,
                )
            if got is None:
                return finish(UNSAT, None, None)
            phi = got
            state.candidate_history.append(phi)
            # Verification always checks the plain program: the deferred
            # placeholders exist to speed up the inductive step, and the
            # emitted solution must pass without them.
            vr = verify(expanded, phi, cfg, None, deadline)
            stats.candidate_evaluations += vr.evaluations
            if vr.passed:
                solution = concretize(expanded, phi)
                return finish(SOLVED, phi, solution)
            sigma = vr.counterexample
            check = evaluate_harness(
                expanded.program, phi, sigma, cfg.eval_limits(), harness=harness
            )
            if check.passed:
                raise InternalError(
                    "compiled verifier and reference evaluator disagree on a "
                    "counterexample"
                )
            key = _sigma_key(sigma)
            if key in state.cex_keys:
                if decomp is not None:
                    # The candidate passes this input under decomposition but
                    # fails it plainly (a depth-limit artifact): continue
                    # without the optimization.
                    log.warning(
                        "decomposed/plain divergence on %s; disabling decomposition",
                        key,
                    )
                    drop_decomposition()
                    continue
                raise InternalError(f"counterexample repeated: {key}")
            state.cex_keys.add(key)
            state.counterexamples.append(sigma)
            log.info(
                "iteration %d: counterexample %s", state.iterations, key
            )
    except SynthesisTimeout:
        return finish(TIMEOUT, None, None)
