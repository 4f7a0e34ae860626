"""Built-in presentations used by the checks, the tests and the sample files."""

from .extensions import ExtensionProblem
from .files import PresentationFile
from .logic import LogicPresentation
from .terms import VarSet

# name: (presentation text, variables of the extension)
BUILTINS = {
    "singular-analog": (
        """
        sig m11:0 m12:0 m21:0 m22:0 i1:0 i2:0 star:0
        vars x
        rule m11, m12 => i1
        rule m21, m22 => i2
        rule i1, i2 => star
        """,
        "x y",
    ),
    "running": (
        """
        sig a:0
        vars x
        rule x => a
        """,
        "x y",
    ),
    "collapse": (
        """
        sig
        vars x
        """,
        "x y",
    ),
    "two-step": (
        """
        sig a:0 b:0
        vars x
        rule x => a
        rule a => b
        """,
        "x y",
    ),
    "explosion": (
        """
        sig bot:0
        vars x
        rule bot => x
        """,
        "x y",
    ),
    "guarded": (
        """
        sig a:0 b:0
        vars x
        rule a, x => b
        """,
        "x y",
    ),
    "cut-failure": (
        """
        sig c:0 d:0 f:1 g:1
        vars x
        rule f(x) => c
        rule c, g(x) => d
        bounds depth=1 iters=16
        """,
        "x y",
    ),
    "structurality-failure": (
        """
        sig a:0 h:2
        vars x
        rule x => a
        bounds depth=1 iters=16
        """,
        "x y",
    ),
}

# small constants-only instances on which every relation is computed in full
CONSTANTS_ONLY = ["running", "collapse", "two-step", "explosion", "guarded"]


def builtin(name: str) -> LogicPresentation:
    try:
        text, _ = BUILTINS[name]
    except KeyError:
        raise ValueError(f"no built-in presentation named {name!r}; choose from {sorted(BUILTINS)}") from None
    return PresentationFile().parse_presentation(text, name)


def builtin_target(name: str) -> VarSet:
    return VarSet.parse(BUILTINS[name][1])


def singular_analog() -> LogicPresentation:
    return builtin("singular-analog")


def running_example() -> LogicPresentation:
    return builtin("running")


def collapse_example() -> LogicPresentation:
    return builtin("collapse")


def two_step_example() -> LogicPresentation:
    return builtin("two-step")


def cut_failure_example() -> LogicPresentation:
    return builtin("cut-failure")


def structurality_failure_example() -> LogicPresentation:
    return builtin("structurality-failure")


def extension_problem(name: str) -> ExtensionProblem:
    """A built-in presentation together with its usual variable extension."""
    return ExtensionProblem(builtin(name), builtin_target(name))


def running_problem() -> ExtensionProblem:
    return extension_problem("running")


def collapse_problem() -> ExtensionProblem:
    return extension_problem("collapse")


def cut_failure_problem() -> ExtensionProblem:
    return extension_problem("cut-failure")


def structurality_failure_problem() -> ExtensionProblem:
    return extension_problem("structurality-failure")
