"""End-to-end wiring: parse -> library merge -> expansion -> shape
detection -> decomposition -> CEGIS -> concrete solution.

Also handles the per-file configuration pragma: a leading comment line of
the form ``//! key=value key=value`` (keys mirror the CLI flags) supplies
benchmark-specific bounds; explicit CLI flags win over pragmas.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

from .ast import FuncDecl, SurfaceProgram
from .cegis import (
    SynthesisConfig,
    SynthesisResult,
    VerifyResult,
    run_cegis,
    total_assignment,
    verify,
)
from .errors import SynrecError
from .expand import ExpandedProgram, expand_program
from .indecomp import ClassificationReport, SpecShape, classify_transformer, detect_spec_shape
from .parser import assert_resolution_total, load_library, parse_program
from .prelude import prelude_text

log = logging.getLogger("synrec")

_PRAGMA_KEYS = {
    "input-depth": ("input_depth", int),
    "int-domain": ("int_domain", "range"),
    "hole-domain": ("hole_domain", "range"),
    "inline-bound": ("inline_bound", int),
    "unroll": ("unroll_depth", int),
    "timeout-secs": ("timeout_secs", float),
}


def parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise SynrecError(f"expected LO..HI, got {text!r}")
    return int(lo), int(hi)


def parse_pragmas(text: str) -> dict:
    """Read `//! key=value ...` configuration lines at the top of a file."""
    overrides: dict = {}
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if not stripped.startswith("//!"):
            break
        for item in stripped[3:].split():
            key, sep, value = item.partition("=")
            if not sep or key not in _PRAGMA_KEYS:
                raise SynrecError(f"unknown pragma {item!r}")
            field_name, conv = _PRAGMA_KEYS[key]
            if conv == "range":
                lo, hi = parse_range(value)
                if field_name == "int_domain":
                    overrides["int_domain"] = tuple(range(lo, hi + 1))
                else:
                    overrides["hole_lo"], overrides["hole_hi"] = lo, hi
            else:
                overrides[field_name] = conv(value)
    return overrides


def config_for(text: str, cli_overrides: dict | None = None) -> SynthesisConfig:
    values = parse_pragmas(text)
    if cli_overrides:
        values.update({k: v for k, v in cli_overrides.items() if v is not None})
    return dataclasses.replace(SynthesisConfig(), **values)


def load_with_library(text: str, lib_text: str | None = None) -> SurfaceProgram:
    program = parse_program(text)
    program = load_library(program, lib_text if lib_text is not None else prelude_text())
    assert_resolution_total(program)
    return program


@dataclass
class Prepared:
    expanded: ExpandedProgram
    shape: SpecShape | None
    report: ClassificationReport | None
    harness: FuncDecl


def prepare(program: SurfaceProgram, cfg: SynthesisConfig) -> Prepared:
    expanded = expand_program(program, cfg.expansion_context())
    harnesses = expanded.program.harnesses
    if not harnesses:
        raise SynrecError("program has no harness")
    if len(harnesses) > 1:
        raise SynrecError("exactly one harness per program is supported")
    harness = harnesses[0]
    shape = detect_spec_shape(expanded.program, harness)
    report = None
    if shape is not None:
        report = classify_transformer(
            expanded.program.function(shape.trans), shape.source_adt
        )
        log.info(
            "inductive shape: trans=%s interp_s=%s interp_d=%s (%s)",
            shape.trans,
            shape.interp_s,
            shape.interp_d,
            report.verdict,
        )
    return Prepared(expanded, shape, report, harness)


def synthesize(text: str, cfg: SynthesisConfig, lib_text: str | None = None) -> SynthesisResult:
    program = load_with_library(text, lib_text)
    prep = prepare(program, cfg)
    return run_cegis(prep.expanded, cfg, prep.shape, prep.report)


def check_concrete(
    base_text: str,
    cfg: SynthesisConfig,
    solution_text: str | None = None,
    lib_text: str | None = None,
) -> VerifyResult:
    """Bounded verification of a concrete program.

    With `solution_text`, its function definitions replace the same-named
    functions of the base program (the original harness file).  The result
    must be free of synthesis constructs.
    """
    program = load_with_library(base_text, lib_text)
    if solution_text is not None:
        program = _merge_solution(program, solution_text)
    expanded = expand_program(program, cfg.expansion_context())
    if expanded.control_space:
        raise SynrecError(
            f"solution still contains {len(expanded.control_space)} synthesis constructs"
        )
    if not expanded.program.harnesses:
        raise SynrecError("program has no harness")
    phi = total_assignment(expanded.control_space, {})
    return verify(expanded, phi, cfg)


def _merge_solution(base: SurfaceProgram, solution_text: str) -> SurfaceProgram:
    # The solution file shadows the base program's functions: merging base
    # *under* the solution keeps the solution's definitions.
    from .parser import merge_programs

    return merge_programs(parse_program(solution_text), base)
