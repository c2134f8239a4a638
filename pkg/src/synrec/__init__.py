"""synrec: desk-scale synthesis of recursive ADT transformations.

Pipeline: parse -> type-directed expansion of polymorphic synthesis
constructs -> (optional) inductive decomposition -> CEGIS over the finite
control space -> concretized, bounded-verified program.
"""

__version__ = "0.1.0"
