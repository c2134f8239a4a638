"""Generator for the variant-count scaling family.

Builds desugaring benchmarks over a source language with one literal
variant plus a growing set of unary arithmetic constructs, all compiled
into a three-variant add/multiply target language through the reusable
template.  Used by the scaling experiment and the acceptance suite to
measure how synthesis time grows with the variant count, with and without
inductive decomposition.
"""

from __future__ import annotations

# (variant name, interpreter expression over `x`)
_UNARY = (
    ("Inc", "return x + 1;"),
    ("Dbl", "return x + x;"),
    ("Sqr", "return x * x;"),
    ("Tri", "return x + x + x;"),
    ("Quad", "return x + x + x + x;"),
    ("Cube", "return x * x * x;"),
    ("Zero", "return 0;"),
)

MIN_VARIANTS = 2
MAX_VARIANTS = 1 + len(_UNARY)


def scaling_benchmark(n_variants: int) -> str:
    """Source text for the family member with `n_variants` source variants
    (one literal plus n-1 unary constructs)."""
    if not MIN_VARIANTS <= n_variants <= MAX_VARIANTS:
        raise ValueError(f"variant count must be in {MIN_VARIANTS}..{MAX_VARIANTS}")
    unary = _UNARY[: n_variants - 1]
    lines = ["adt srcN {", "  Lit { int v; }"]
    lines += [f"  {name} {{ srcN e; }}" for name, _ in unary]
    lines += [
        "}",
        "",
        "adt dstN {",
        "  LitD { int v; }",
        "  AddD { dstN a; dstN b; }",
        "  MulD { dstN a; dstN b; }",
        "}",
        "",
        "int srcRun(srcN e) {",
        "  switch (e) {",
        "    case Lit: return e.v;",
    ]
    for name, body in unary:
        lines.append(f"    case {name}: {{ int x = srcRun(e.e); {body} }}")
    lines += [
        "  }",
        "}",
        "",
        "int dstRun(dstN e) {",
        "  switch (e) {",
        "    case LitD: return e.v;",
        "    case AddD: return dstRun(e.a) + dstRun(e.b);",
        "    case MulD: return dstRun(e.a) * dstRun(e.b);",
        "  }",
        "}",
        "",
        "dstN lower(srcN e) {",
        "  return recursiveReplacer(e, lower);",
        "}",
        "",
        "harness void main(srcN e) {",
        "  assert(srcRun(e) == dstRun(lower(e)));",
        "}",
    ]
    return "\n".join(lines) + "\n"
