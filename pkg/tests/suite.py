"""The 12 benchmark configurations used by the acceptance and property tests.

Six geometry/advection combinations (three space forms, each with A = 0
and with the gradient field a(r) = r^2/4), four per nonlinearity.
"""

from extremal_branch.model import make_spec

COMBOS = {
    "c1": ("euclidean", None),
    "c2": ("hyperbolic", None),
    "c3": ("spherical", None),
    "c4": ("euclidean", "r^2/4"),
    "c5": ("hyperbolic", "r^2/4"),
    "c6": ("spherical", "r^2/4"),
}

PLAN = [
    ("gelfand", 2.0, 2, ["c1", "c2", "c3", "c4"]),
    ("power", 2.0, 3, ["c5", "c6", "c1", "c2"]),
    ("mems", 2.0, 2, ["c3", "c4", "c5", "c6"]),
]


def configs():
    out = []
    for kind, m, N, combos in PLAN:
        for c in combos:
            geom, a = COMBOS[c]
            label = f"{kind}-{c}-{geom}-{'grad' if a else 'A0'}-N{N}"
            out.append((label, make_spec(geom, N, 1.0, kind=kind, m=m, a=a)))
    return out
