"""Grammar-driven generator of well-formed classmarks.

Hypothesis draws a seed and a plain ``random.Random`` walks the grammar;
drawing one integer per case keeps 1000-case suites fast. Each case is
``(text, shape)`` where ``shape`` counts what the generator built (leaves,
connectors, compounds, connected expressions, subgroups) without consulting
the parser.
"""

import random
from collections import Counter

from hypothesis import strategies as st

CONNECTORS = ["+", ":", "::", "/"]


def _decimals(r, groups=2):
    # a group after a point may not start with 0 outside parentheses
    return "".join("." + str(r.randint(1, 999)) for _ in range(r.randint(0, groups)))


def _main(r):
    return str(r.randint(0, 999)) + _decimals(r)


def _common(r):
    pick = r.randrange(6)
    if pick == 0:
        return f"({r.randint(1, 999)}{_decimals(r)})"
    if pick == 1:
        return "(0" + r.choice(["", "1", "2", "35", "82", "86.7", "0.034", "0.034MP3"]) + ")"
    if pick == 2:
        return f"(={r.randint(1, 999)})"
    if pick == 3:
        return f"={r.randint(1, 999)}{_decimals(r, 1)}"
    if pick == 4:
        return f'"{r.randint(1, 2020)}{r.choice(["", "/1945", "/20"])}"'
    return "-0" + r.choice("2345") + r.choice(["", "1", "26"])


def _special(r):
    pick = r.randrange(3)
    if pick == 0:
        return f"-{r.randint(1, 999)}"
    if pick == 1:
        return f".0{r.randint(1, 99)}"
    return "`" + r.choice(["0", "06", "1", "42", "311"])


def _operand(r, depth):
    if depth > 0 and r.randrange(6) == 0:
        text, shape = _expression(r, depth - 1)
        return f"[{text}]", shape + Counter(subgroup=1)
    head_is_main = r.random() < 0.5
    parts = [_main(r) if head_is_main else _common(r)]
    if head_is_main and r.randrange(4) == 0:
        parts.append(r.choice(["A", "Ab", "Shakespeare", "MP", "Z"]))
    for _ in range(r.randint(0, 3)):
        parts.append(_common(r) if r.random() < 0.5 else _special(r))
    if r.randrange(7) == 0:
        parts.append("*" + r.choice(["A", "ABC", "MP3", "DDC"]))
    shape = Counter(leaves=len(parts))
    if len(parts) > 1:
        shape["compound"] += 1
    return "".join(parts), shape


def _expression(r, depth):
    n = r.randint(1, 3)
    text, shape = _operand(r, depth)
    for _ in range(n - 1):
        more, sub = _operand(r, depth)
        text += r.choice(CONNECTORS) + more
        shape += sub
    if n > 1:
        shape += Counter(connected=1, connectors=n - 1)
    return text, shape


def generate(seed: int, depth: int = 2):
    return _expression(random.Random(seed), depth)


notations = st.integers(0, 2**48).map(generate)
