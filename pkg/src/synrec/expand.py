"""Type-directed expansion of polymorphic synthesis constructs.

Expansion pushes required types top-down and eliminates every `case?`,
`fields?`, `cons?`, and generator call, leaving a program whose only
unknowns are enumerated holes and choices (the control space).  Generator
bodies are inlined per call with fresh control points; recursive generator
chains are cut at a per-path inlining bound by an always-failing node.
Standard recursive functions (interpreters and the function under
synthesis) are left as calls so decomposition and the evaluator can handle
them.

One expansion runs sequentially (control-point ids come from a local
counter) and is deterministic: the same program and context give a
bit-identical result.  Independent expansions may run concurrently.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from .ast import (
    BIT,
    INT,
    POLYGEN,
    STANDARD,
    AdtType,
    AlwaysFail,
    ArrayLit,
    ArrayType,
    ArrowType,
    Assert,
    BinOp,
    BoxMake,
    Call,
    Choice,
    Ctor,
    Expr,
    FieldAccess,
    FieldsOf,
    FlexSwitch,
    FuncDecl,
    FuncRef,
    FunType,
    GenLambda,
    Hole,
    If,
    Index,
    IntLit,
    Let,
    PrimType,
    RecordType,
    Span,
    SurfaceProgram,
    Switch,
    SwitchArm,
    TypeExpr,
    UnitLit,
    UnitType,
    UnknownCtor,
    UnOp,
    Var,
    children,
    contains_psc,
    rebuild,
    walk,
)
from .errors import ExpandError, InternalError, UnifyError
from .typesys import (
    ARITH_OPS,
    BOOL_OPS,
    EQ_OPS,
    REL_OPS,
    Substitution,
    TypeEnv,
    apply_subst,
    check_type,
    is_concrete,
    type_of,
    unify,
)

log = logging.getLogger("synrec")


@dataclass(frozen=True)
class ControlPoint:
    """One enumerated decision: an integer/bit hole or an n-way choice."""

    id: int
    kind: str  # "hole" | "choice"
    lo: int = 0
    hi: int = 0  # holes: inclusive domain; choices: hi = arity - 1
    ty: TypeExpr | None = None
    origin: tuple = ()

    @property
    def arity(self) -> int:
        return self.hi - self.lo + 1

    def domain(self) -> range:
        return range(self.lo, self.hi + 1)


@dataclass(frozen=True)
class ExpansionContext:
    inline_bound: int = 3
    hole_lo: int = 0
    hole_hi: int = 3
    unroll_depth: int = 5  # consumed by the synthesis engine


@dataclass
class ExpandedProgram:
    """PSC-free, generator-free program plus its control space."""

    program: SurfaceProgram
    control_space: tuple[ControlPoint, ...]

    @property
    def functions(self):
        return self.program.functions

    @property
    def harnesses(self):
        return self.program.harnesses

    def point(self, cp: int) -> ControlPoint:
        return self.control_space[cp]


@dataclass(frozen=True)
class _Path:
    """Per-branch inlining state: counters and the call-site trail."""

    counters: tuple[tuple[str, int], ...] = ()
    trail: tuple[str, ...] = ()

    def count(self, name: str) -> int:
        for k, v in self.counters:
            if k == name:
                return v
        return 0

    def enter(self, name: str) -> "_Path":
        counters = tuple((k, v + 1 if k == name else v) for k, v in self.counters)
        if all(k != name for k, _ in self.counters):
            counters = counters + ((name, 1),)
        return _Path(counters, self.trail + (name,))


_TRIVIAL_ARG = (Var, IntLit, FuncRef, GenLambda)


class Expander:
    def __init__(self, program: SurfaceProgram, ctx: ExpansionContext):
        self.program = program
        self.ctx = ctx
        self.points: list[ControlPoint] = []
        self._used_names: set[str] = set()
        for f in program.functions:
            self._used_names.add(f.name)
            self._used_names.update(n for n, _ in f.params)
            if f.kind == STANDARD:
                for node in walk(f.body):
                    if isinstance(node, Let):
                        self._used_names.add(node.name)

    # -- plumbing -------------------------------------------------------------

    def fresh(self, base: str) -> str:
        if base != "_" and base not in self._used_names:
            self._used_names.add(base)
            return base
        n = 2
        while f"{base}_{n}" in self._used_names:
            n += 1
        name = f"{base}_{n}"
        self._used_names.add(name)
        return name

    def new_hole(self, ty: PrimType, span: Span, path: _Path) -> Hole:
        if ty == BIT:
            lo, hi = 0, 1
        else:
            lo, hi = self.ctx.hole_lo, self.ctx.hole_hi
        cp = ControlPoint(len(self.points), "hole", lo, hi, ty, (span, path.trail))
        self.points.append(cp)
        return Hole(cp=cp.id, ty=ty, span=span)

    def new_choice(self, arms: tuple[Expr, ...], span: Span, path: _Path) -> Expr:
        if len(arms) == 1:
            return arms[0]
        cp = ControlPoint(
            len(self.points), "choice", 0, len(arms) - 1, None, (span, path.trail)
        )
        self.points.append(cp)
        return Choice(arms, cp=cp.id, span=span)

    # -- the expansion judgement ------------------------------------------------

    def expand(self, env: TypeEnv, e: Expr, required: TypeExpr, path: _Path) -> Expr:
        if isinstance(e, Var):
            t = env.lookup(e.name)
            if t is None:
                raise ExpandError(f"unbound variable {e.name!r}", e.span)
            if t != required:
                raise ExpandError(f"{e.name!r} has type {t}, required {required}", e.span)
            return e
        if isinstance(e, IntLit):
            if required == INT:
                return e
            if required == BIT and e.value in (0, 1):
                return e
            raise ExpandError(f"literal {e.value} cannot have type {required}", e.span)
        if isinstance(e, UnitLit):
            if isinstance(required, UnitType):
                return e
            raise ExpandError(f"missing return value of type {required}", e.span)
        if isinstance(e, FuncRef):
            if isinstance(required, FunType):
                return e
            f = self.program.function(e.name)
            if f is not None and f.kind == STANDARD and isinstance(required, ArrowType):
                from .typesys import signature_type

                if signature_type(f) == required:
                    return e
            raise ExpandError(
                f"function reference {e.name!r} cannot have type {required}", e.span
            )
        if isinstance(e, GenLambda):
            raise ExpandError(
                "expression-as-generator may only appear as a call or argument", e.span
            )
        if isinstance(e, Let):
            if not is_concrete(e.ty) and not isinstance(e.ty, UnitType):
                raise ExpandError(
                    f"type variable in declaration of {e.name!r} where a concrete type "
                    "is expected",
                    e.span,
                )
            value = self.expand(env, e.value, e.ty, path)
            body = self.expand(env.bind(e.name, e.ty), e.body, required, path)
            return Let(e.name, e.ty, value, body, span=e.span)
        if isinstance(e, Call):
            return self.expand_call(env, e, required, path)
        if isinstance(e, Switch):
            return self.expand_switch(env, e, required, path)
        if isinstance(e, FlexSwitch):
            return self.expand_flex_match(env, e, required, path)
        if isinstance(e, FieldAccess):
            t = self._path_type(env, e)
            if t != required:
                raise ExpandError(f"field access has type {t}, required {required}", e.span)
            return e
        if isinstance(e, Ctor):
            owner = self.program.variant_owner(e.variant)
            if owner is None:
                raise ExpandError(f"unknown variant {e.variant!r}", e.span)
            if required != AdtType(owner.name):
                raise ExpandError(
                    f"constructor {e.variant!r} builds {owner.name}, required {required}",
                    e.span,
                )
            decl = owner.variant(e.variant)
            declared = dict(decl.fields)
            fields = tuple(
                (l, self.expand(env, v, declared[l], path)) for l, v in e.fields
            )
            return Ctor(e.variant, fields, span=e.span)
        if isinstance(e, ArrayLit):
            if not isinstance(required, ArrayType):
                raise ExpandError(f"array literal where {required} expected", e.span)
            items = tuple(self.expand(env, x, required.elem, path) for x in e.items)
            return ArrayLit(items, elem_ty=required.elem, span=e.span)
        if isinstance(e, Index):
            base = self.expand(env, e.base, ArrayType(required), path)
            index = self.expand(env, e.index, INT, path)
            return Index(base, index, span=e.span)
        if isinstance(e, Assert):
            if not isinstance(required, UnitType):
                raise ExpandError(f"assert used where {required} expected", e.span)
            return Assert(self.expand(env, e.cond, BIT, path), aid=e.aid, span=e.span)
        if isinstance(e, BinOp):
            return self.expand_binop(env, e, required, path)
        if isinstance(e, UnOp):
            if required != BIT:
                raise ExpandError(f"'!' produces bit, required {required}", e.span)
            return UnOp("!", self.expand(env, e.operand, BIT, path), span=e.span)
        if isinstance(e, If):
            if isinstance(e.cond, Hole):
                # `if (??)` is the classic template disjunction: treat it as a
                # two-way choice so branches filter independently.
                return self.expand_choice(
                    env, Choice((e.then, e.els), span=e.span), required, path
                )
            cond = self.expand(env, e.cond, BIT, path)
            then = self.expand(env, e.then, required, path)
            els = self.expand(env, e.els, required, path)
            return If(cond, then, els, span=e.span)
        if isinstance(e, Hole):
            if required in (INT, BIT):
                return self.new_hole(required, e.span, path)
            raise ExpandError(f"?? requires an int or bit context, got {required}", e.span)
        if isinstance(e, Choice):
            return self.expand_choice(env, e, required, path)
        if isinstance(e, AlwaysFail):
            if e.ty != required:
                raise ExpandError(
                    f"unreachable<{e.ty}> used where {required} expected", e.span
                )
            return e
        if isinstance(e, FieldsOf):
            return self.expand_field_list(env, e, required)
        if isinstance(e, UnknownCtor):
            return self.expand_unknown_constructor(env, e, required, path)
        if isinstance(e, BoxMake):
            raise InternalError("decomposition node reached the expander")
        raise InternalError(f"expander met unknown node {type(e).__name__}")

    def _path_type(self, env: TypeEnv, e: Expr) -> TypeExpr:
        """Type a variable-or-field-path scrutinee bottom-up."""
        if isinstance(e, Var):
            t = env.lookup(e.name)
            if t is None:
                raise ExpandError(f"unbound variable {e.name!r}", e.span)
            return t
        if isinstance(e, FieldAccess):
            bt = self._path_type(env, e.base)
            if isinstance(bt, RecordType):
                ft = bt.field_type(e.label)
                if ft is None:
                    raise ExpandError(f"no field {e.label!r} in {bt}", e.span)
                return ft
            raise ExpandError(f"field access on non-record type {bt}", e.span)
        raise ExpandError(
            "only variables and field paths are allowed here", getattr(e, "span", None)
        )

    def expand_binop(self, env: TypeEnv, e: BinOp, required: TypeExpr, path: _Path) -> Expr:
        if e.op in ARITH_OPS:
            if required != INT:
                raise ExpandError(f"{e.op!r} produces int, required {required}", e.span)
            return BinOp(
                e.op,
                self.expand(env, e.lhs, INT, path),
                self.expand(env, e.rhs, INT, path),
                span=e.span,
            )
        if e.op in REL_OPS or e.op in BOOL_OPS:
            if required != BIT:
                raise ExpandError(f"{e.op!r} produces bit, required {required}", e.span)
            operand_ty = INT if e.op in REL_OPS else BIT
            return BinOp(
                e.op,
                self.expand(env, e.lhs, operand_ty, path),
                self.expand(env, e.rhs, operand_ty, path),
                span=e.span,
            )
        if e.op in EQ_OPS:
            if required != BIT:
                raise ExpandError(f"{e.op!r} produces bit, required {required}", e.span)
            t = self._try_type(env, e.lhs)
            if t is None:
                t = self._try_type(env, e.rhs)
            if t is None:
                raise ExpandError(
                    "cannot determine the operand type of an equality", e.span
                )
            return BinOp(
                e.op,
                self.expand(env, e.lhs, t, path),
                self.expand(env, e.rhs, t, path),
                span=e.span,
            )
        raise InternalError(f"unknown operator {e.op!r}")

    def _try_type(self, env: TypeEnv, e: Expr) -> TypeExpr | None:
        if contains_psc(e) or any(isinstance(n, (Hole, Choice)) for n in walk(e)):
            return None
        from .errors import TypeCheckError

        try:
            return type_of(env, e)
        except TypeCheckError:
            return None

    def expand_choice(self, env: TypeEnv, e: Choice, required: TypeExpr, path: _Path) -> Expr:
        survivors: list[Expr] = []
        for arm in e.arms:
            try:
                survivors.append(self.expand(env, arm, required, path))
            except ExpandError as err:
                log.debug("choice arm dropped at %s: %s", err.span, err.message)
        if not survivors:
            raise ExpandError(
                f"no alternative of this choice fits the required type {required}", e.span
            )
        return self.new_choice(tuple(survivors), e.span, path)

    # -- FL --------------------------------------------------------------------

    def expand_field_list(self, env: TypeEnv, e: FieldsOf, required: TypeExpr) -> Expr:
        if not isinstance(required, ArrayType):
            raise ExpandError(
                f"fields? needs an array context, required type is {required}", e.span
            )
        bt = self._path_type(env, e.base)
        if not isinstance(bt, RecordType):
            raise ExpandError(f"fields? scrutinee has non-record type {bt}", e.span)
        items = tuple(
            FieldAccess(e.base, label, span=e.span)
            for label, ft in bt.fields
            if ft == required.elem
        )
        return ArrayLit(items, elem_ty=required.elem, span=e.span)

    # -- FPM -------------------------------------------------------------------

    def expand_flex_match(
        self, env: TypeEnv, e: FlexSwitch, required: TypeExpr, path: _Path
    ) -> Expr:
        st = env.lookup(e.scrutinee)
        if st is None:
            raise ExpandError(f"unbound switch scrutinee {e.scrutinee!r}", e.span)
        if not isinstance(st, AdtType):
            raise ExpandError(
                f"case? scrutinee {e.scrutinee!r} has non-ADT type {st}", e.span
            )
        adt = self.program.adt(st.name)
        arms = []
        for variant in adt.variants:
            arm_env = env.bind(e.scrutinee, variant.record_type())
            arms.append(SwitchArm(variant.name, self.expand(arm_env, e.body, required, path)))
        return Switch(e.scrutinee, tuple(arms), span=e.span)

    def expand_switch(self, env: TypeEnv, e: Switch, required: TypeExpr, path: _Path) -> Expr:
        st = env.lookup(e.scrutinee)
        if not isinstance(st, AdtType):
            raise ExpandError(
                f"switch scrutinee {e.scrutinee!r} has non-ADT type {st}", e.span
            )
        adt = self.program.adt(st.name)
        declared = [v.name for v in adt.variants]
        listed = [a.variant for a in e.arms]
        if sorted(declared) != sorted(listed):
            raise ExpandError(
                f"switch must cover exactly the variants of {adt.name}", e.span
            )
        arms = []
        for arm in e.arms:
            variant = adt.variant(arm.variant)
            arm_env = env.bind(e.scrutinee, variant.record_type())
            arms.append(SwitchArm(arm.variant, self.expand(arm_env, arm.body, required, path)))
        return Switch(e.scrutinee, tuple(arms), span=e.span)

    # -- UC1 / UC2 ----------------------------------------------------------------

    def expand_unknown_constructor(
        self, env: TypeEnv, e: UnknownCtor, required: TypeExpr, path: _Path
    ) -> Expr:
        if isinstance(required, PrimType):
            return self.new_hole(required, e.span, path)
        if isinstance(required, AdtType):
            adt = self.program.adt(required.name)
            variant_arms: list[Expr] = []
            for variant in adt.variants:
                fields: list[tuple[str, Expr]] = []
                dead = False
                for label, ft in variant.fields:
                    alts: list[Expr] = []
                    for arg in e.args:
                        try:
                            alts.append(self.expand(env, arg, ft, path))
                        except ExpandError as err:
                            log.debug(
                                "cons? argument dropped for %s.%s: %s",
                                variant.name,
                                label,
                                err.message,
                            )
                    if not alts:
                        dead = True
                        break
                    fields.append((label, self.new_choice(tuple(alts), e.span, path)))
                if dead:
                    log.debug("cons? variant %s dropped: a field has no fit", variant.name)
                    continue
                variant_arms.append(Ctor(variant.name, tuple(fields), span=e.span))
            if not variant_arms:
                raise ExpandError(
                    f"no variant of {required.name} can be built here", e.span
                )
            return self.new_choice(tuple(variant_arms), e.span, path)
        raise ExpandError(
            f"cons? requires an ADT or primitive context, got {required}", e.span
        )

    # -- calls: builtins, standard, generators, PG --------------------------------

    def expand_call(self, env: TypeEnv, e: Call, required: TypeExpr, path: _Path) -> Expr:
        local = env.lookup(e.callee)
        if isinstance(local, FunType):
            raise ExpandError(
                f"call through fun parameter {e.callee!r} survives to a context where "
                "it cannot be inlined",
                e.span,
            )
        if e.callee == "map" and self.program.function("map") is None:
            return self.expand_map(env, e, required, path)
        f = self.program.function(e.callee)
        if f is None:
            raise ExpandError(f"unknown function {e.callee!r}", e.span)
        if f.kind == STANDARD:
            if f.ret != required:
                raise ExpandError(
                    f"{e.callee!r} returns {f.ret}, required {required}", e.span
                )
            if len(e.args) != len(f.params):
                raise ExpandError(
                    f"{e.callee!r} expects {len(f.params)} arguments", e.span
                )
            args = []
            for arg, (pname, pty) in zip(e.args, f.params):
                if isinstance(pty, FunType):
                    raise ExpandError(
                        f"standard function {e.callee!r} takes a fun parameter; only "
                        "generators may",
                        e.span,
                    )
                args.append(self.expand(env, arg, pty, path))
            return Call(e.callee, tuple(args), span=e.span)
        return self.expand_generator_call(env, e, f, required, path)

    def expand_map(self, env: TypeEnv, e: Call, required: TypeExpr, path: _Path) -> Expr:
        if len(e.args) != 2:
            raise ExpandError("map takes an array and a function", e.span)
        if not isinstance(required, ArrayType):
            raise ExpandError(f"map produces an array, required {required}", e.span)
        arr_arg, fn_arg = e.args
        if not isinstance(fn_arg, FuncRef):
            raise ExpandError("map requires a named function argument", e.span)
        f = self.program.function(fn_arg.name)
        if f.kind != STANDARD or len(f.params) != 1:
            raise ExpandError(
                f"map requires a unary standard function, got {fn_arg.name!r}", e.span
            )
        if f.ret != required.elem:
            raise ExpandError(
                f"map over {fn_arg.name!r} produces {f.ret}[], required {required}",
                e.span,
            )
        elem_ty = f.params[0][1]
        arr = self.expand(env, arr_arg, ArrayType(elem_ty), path)
        if not isinstance(arr, ArrayLit):
            raise ExpandError("map needs a statically known array argument", e.span)
        items = tuple(Call(fn_arg.name, (item,), span=e.span) for item in arr.items)
        return ArrayLit(items, elem_ty=required.elem, span=e.span)

    def expand_generator_call(
        self, env: TypeEnv, e: Call, f: FuncDecl, required: TypeExpr, path: _Path
    ) -> Expr:
        if path.count(f.name) >= self.ctx.inline_bound:
            return AlwaysFail(required, span=e.span)
        if len(e.args) != len(f.params):
            raise ExpandError(f"{e.callee!r} expects {len(f.params)} arguments", e.span)

        if f.kind == POLYGEN:
            pairs: list[tuple[TypeExpr, TypeExpr]] = [(f.ret, required)]
            for arg, (_, pty) in zip(e.args, f.params):
                if isinstance(pty, FunType) and not isinstance(arg, FuncRef):
                    continue  # the argument becomes a generator lambda
                t = self._try_type(env, arg)
                if t is not None:
                    pairs.append((pty, t))
            try:
                subst = unify(pairs)
            except UnifyError as err:
                raise ExpandError(
                    f"cannot instantiate {f.name!r}: {err.message}", e.span
                ) from None
        else:
            subst = Substitution(())
            if f.ret != required:
                raise ExpandError(
                    f"generator {f.name!r} returns {f.ret}, required {required}", e.span
                )

        mapping: dict[str, Expr] = {}
        let_bindings: list[tuple[str, TypeExpr, Expr]] = []
        inner_env = env
        for arg, (pname, pty) in zip(e.args, f.params):
            pt = apply_subst(subst, pty)
            if isinstance(pt, FunType):
                if isinstance(arg, (FuncRef, GenLambda)):
                    mapping[pname] = arg
                else:
                    mapping[pname] = GenLambda(arg, span=getattr(arg, "span", None) or e.span)
                continue
            if not is_concrete(pt):
                raise ExpandError(
                    f"type variable encountered for parameter {pname!r} of {f.name!r} "
                    "where a concrete type is expected",
                    e.span,
                )
            expanded = self.expand(env, arg, pt, path)
            if isinstance(expanded, _TRIVIAL_ARG):
                mapping[pname] = expanded
            else:
                fresh = self.fresh(pname)
                let_bindings.append((fresh, pt, expanded))
                mapping[pname] = Var(fresh, span=e.span)
                inner_env = inner_env.bind(fresh, pt)

        ret_ty = apply_subst(subst, f.ret)
        if not is_concrete(ret_ty):
            raise ExpandError(
                f"cannot determine the concrete result type of {f.name!r}", e.span
            )
        body = self._instantiate_body(f.body, mapping, subst)
        result = self.expand(inner_env, body, required, path.enter(f.name))
        for name, ty, value in reversed(let_bindings):
            result = Let(name, ty, value, result, span=e.span)
        return result

    def _instantiate_body(
        self, body: Expr, mapping: dict[str, Expr], subst: Substitution
    ) -> Expr:
        """Alpha-rename lets, substitute parameters, and apply the type subst."""
        renames: dict[str, str] = {}

        def go(node: Expr, scope: dict[str, Expr]) -> Expr:
            if isinstance(node, Var):
                r = scope.get(node.name)
                if r is not None:
                    return r if isinstance(r, Expr) else node
                return node
            if isinstance(node, Let):
                value = go(node.value, scope)
                if node.name == "_":
                    new_name = "_"
                else:
                    new_name = self.fresh(node.name)
                inner = dict(scope)
                inner[node.name] = Var(new_name, span=node.span)
                return Let(
                    new_name,
                    apply_subst(subst, node.ty),
                    value,
                    go(node.body, inner),
                    span=node.span,
                )
            if isinstance(node, Call):
                args = tuple(go(a, scope) for a in node.args)
                r = scope.get(node.callee)
                if r is not None:
                    if isinstance(r, FuncRef):
                        return Call(r.name, args, span=node.span)
                    if isinstance(r, GenLambda):
                        if args:
                            raise ExpandError(
                                "generator lambdas take no arguments", node.span
                            )
                        return r.body
                    if isinstance(r, Var):
                        return Call(r.name, args, span=node.span)
                    raise ExpandError(
                        f"parameter {node.callee!r} is not callable", node.span
                    )
                return Call(node.callee, args, span=node.span)
            if isinstance(node, (Switch, FlexSwitch)):
                r = scope.get(node.scrutinee)
                scrut = node.scrutinee
                if isinstance(r, Var):
                    scrut = r.name
                elif r is not None:
                    raise ExpandError(
                        "switch scrutinee must remain a variable after inlining",
                        node.span,
                    )
                if isinstance(node, Switch):
                    return Switch(
                        scrut,
                        tuple(SwitchArm(a.variant, go(a.body, scope)) for a in node.arms),
                        span=node.span,
                    )
                return FlexSwitch(scrut, go(node.body, scope), span=node.span)
            if isinstance(node, AlwaysFail):
                return AlwaysFail(apply_subst(subst, node.ty), span=node.span)
            return rebuild(node, [go(c, scope) for c in children(node)])

        return go(body, dict(mapping))


# ---------------------------------------------------------------------------
# Entry point and validation


def expand_program(program: SurfaceProgram, ctx: ExpansionContext) -> ExpandedProgram:
    """Expand every standard function under its declared return type."""
    expander = Expander(program, ctx)
    funcs: list[FuncDecl] = []
    for f in program.functions:
        if f.kind != STANDARD:
            continue  # generators are consumed by inlining
        for pname, pty in f.params:
            if not is_concrete(pty):
                raise ExpandError(
                    f"parameter {pname!r} of {f.name!r} must have a concrete type",
                    f.span,
                )
        if not (is_concrete(f.ret) or isinstance(f.ret, UnitType)):
            raise ExpandError(f"{f.name!r} must have a concrete return type", f.span)
        env = TypeEnv(program)
        for pname, pty in f.params:
            env = env.bind(pname, pty)
        body = expander.expand(env, f.body, f.ret, _Path())
        funcs.append(replace(f, body=body))
    out = ExpandedProgram(
        SurfaceProgram(program.adts, tuple(funcs)), tuple(expander.points)
    )
    validate_expansion(out)
    return out


def validate_expansion(expanded: ExpandedProgram) -> None:
    """Assert the expander's postconditions; violations are internal bugs."""
    seen: set[int] = set()
    gen_free_names = {f.name for f in expanded.functions}
    for f in expanded.functions:
        for node in walk(f.body):
            if isinstance(node, (FieldsOf, FlexSwitch, UnknownCtor, GenLambda)):
                raise InternalError(f"PSC survived expansion in {f.name!r}")
            if isinstance(node, Call) and node.callee not in gen_free_names:
                raise InternalError(
                    f"call to non-standard function {node.callee!r} survived expansion"
                )
            if isinstance(node, (Hole, Choice)):
                if node.cp is None:
                    raise InternalError("control node without an id")
                if node.cp in seen:
                    raise InternalError(f"duplicate control point id {node.cp}")
                seen.add(node.cp)
        env = TypeEnv(expanded.program)
        for pname, pty in f.params:
            env = env.bind(pname, pty)
        check_type(env, f.body, f.ret)
    ids = [p.id for p in expanded.control_space]
    if ids != list(range(len(ids))):
        raise InternalError("control point ids are not dense")
    if not seen.issubset(set(ids)):
        raise InternalError("control nodes reference unknown points")
