"""Convert a BIF network file into the bnboot network JSON format.

Usage: python scripts/bif_to_json.py alarm.bif src/bnboot/data/alarm.json
"""
import re
import sys

import numpy as np

from bnboot.core import BayesianNetwork, Dag, Variable, config_strides
from bnboot.io import write_network

VAR_RE = re.compile(r"variable\s+(\S+)\s*\{\s*type\s+discrete\s*\[\s*\d+\s*\]\s*\{([^}]*)\}", re.S)
PROB_RE = re.compile(r"probability\s*\(\s*([^)|]+?)\s*(?:\|\s*([^)]*))?\)\s*\{([^}]*)\}", re.S)


def parse_bif(text):
    variables = [Variable(name, tuple(s.strip() for s in states.split(",")))
                 for name, states in VAR_RE.findall(text)]
    index = {v.name: i for i, v in enumerate(variables)}
    parents = [()] * len(variables)
    tables = [None] * len(variables)
    for child, given, body in PROB_RE.findall(text):
        i = index[child.strip()]
        pa = tuple(index[p.strip()] for p in given.split(",")) if given.strip() else ()
        parents[i] = pa
        arities = [variables[p].arity for p in pa]
        strides = config_strides(arities)
        table = np.zeros((int(np.prod(arities, dtype=np.int64)), variables[i].arity))
        for entry in body.split(";"):
            entry = entry.strip()
            if not entry:
                continue
            if entry.startswith("table"):
                table[0] = [float(x) for x in entry[5:].split(",")]
                continue
            config, probs = re.match(r"\(([^)]*)\)\s*(.*)", entry, re.S).groups()
            labels = [c.strip() for c in config.split(",")]
            row = sum(variables[p].states.index(lab) * s for p, lab, s in zip(pa, labels, strides))
            table[row] = [float(x) for x in probs.split(",")]
        # source rows are rounded to 7 digits (e.g. 0.3333333 x 3)
        tables[i] = table / table.sum(axis=1, keepdims=True)
    return BayesianNetwork(Dag(variables, parents), tables)


if __name__ == "__main__":
    src, dst = sys.argv[1:3]
    with open(src) as fh:
        write_network(parse_bif(fh.read()), dst)
