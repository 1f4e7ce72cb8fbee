"""Bundled permutation groups and ordinary character tables.

A .grp file is a degree line followed by one generator per line in cycle
notation; a .chars.csv file is in the format read by CharacterTable.
"""

import os
import re

from ..groups import PermGroup

_HERE = os.path.dirname(__file__)

# fixture name -> prime used in the worked examples
FIXTURES = {
    "psl27": 7,
    "borel21": 7,
    "s3": 3,
    "a4": 3,
    "c7": 7,
    "trivial": 2,
}


def _parse_cycles(line: str, degree: int):
    perm = list(range(degree))
    for cyc in re.findall(r"\(([^)]*)\)", line):
        pts = [int(t) - 1 for t in cyc.replace(",", " ").split()]
        for a, b in zip(pts, pts[1:] + pts[:1]):
            perm[a] = b
    return tuple(perm)


def load_group(name: str) -> PermGroup:
    path = os.path.join(_HERE, name + ".grp")
    degree = None
    gens = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("degree="):
                degree = int(line.split("=")[1])
            else:
                gens.append(_parse_cycles(line, degree))
    if not gens:
        gens = [tuple(range(degree))]
    return PermGroup(degree, gens, name=name)


def chars_path(name: str):
    path = os.path.join(_HERE, name + ".chars.csv")
    return path if os.path.exists(path) else None


def load_chars(name: str):
    from ..galgebra import CharacterTable
    path = chars_path(name)
    if path is None:
        raise FileNotFoundError(f"no character table for fixture {name!r}")
    return CharacterTable.from_csv(path)
