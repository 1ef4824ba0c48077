"""Parser corpus shared by the unit and acceptance tests.

Valid entries are evaluated independently by Python itself (``^`` rewritten
to ``**``, whose precedence against unary minus matches the grammar).
"""

import math

NAMES = ("x", "y", "t", "a", "c")

VALID = [
    "1", "2.5", ".5", "3.", "1e-3", "2.5E+2", "x", "a", "-x", "--x",
    "x+y", "x-y", "x*y", "x/y", "x+y*t", "(x+y)*t", "x-y-t", "x/y/t", "x*y/t", "x-(y-t)",
    "x^2", "x^-1", "-x^2", "(-x)^2", "(x^2)^3", "2*x^3", "x^0", "t^-2", "-t^-2", "(x+y)^2",
    "sin(x)", "cos(y)", "tan(x/4)", "exp(2*t)", "log(a)", "sqrt(a)", "sinh(x)", "cosh(y)", "tanh(t)", "atan(x)",
    "exp(-t^2)", "sin(x)^2+cos(x)^2", "x^2*sin(y)+3", "1/2*(x+y)", "exp(2*t)*cos(x)", "sqrt(1+x^2)",
    "log(1+a^2)", "a*x-c*y", "(x)", "((x))", "2*(3*(4*x))", "x*-y", "x/-y", "-(x+y)", "exp(sin(cos(x)))",
    "  x  +  y  ", "1/(1+x^2+y^2)", "4/(1+x^2+y^2)^2", "c^2*exp(2*t)", "atan(y/a)-x", "sinh(t)/cosh(t)",
]

# (text, error kind)
INVALID = [
    ("", "syntax error"), ("   ", "syntax error"), ("x+", "syntax error"), ("(x", "syntax error"),
    ("x)", "syntax error"), ("x^1.5", "syntax error"), ("x^y", "syntax error"), ("2 x", "syntax error"),
    ("x**2", "syntax error"), ("sin()", "syntax error"), ("x $ y", "syntax error"), ("x,y", "syntax error"),
    ("*x", "syntax error"), ("x^", "syntax error"), ("1..2", "syntax error"), ("()", "syntax error"),
    ("dzish", "unknown identifier"), ("1/2*(dzish)", "unknown identifier"), ("x+z", "unknown identifier"),
    ("foo(x)", "unknown function"), ("Sin(x)", "unknown function"), ("sin(x,y)", "arity error"),
    ("sin x", "arity error"), ("exp", "arity error"), ("x^2^1", "syntax error"),
]

ENV = {"x": 0.3, "y": -0.7, "t": 0.45, "a": 1.3, "c": 2.0}


def python_oracle(text: str, env=ENV) -> float:
    ns = {k: getattr(math, k) for k in ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "atan")}
    ns.update(env)
    return eval(text.replace("^", "**"), {"__builtins__": {}}, ns)
