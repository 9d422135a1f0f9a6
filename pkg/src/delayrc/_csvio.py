"""Deterministic CSV writing shared by the emitters.

Floats are rendered with repr (shortest round-trip form) so identical runs
produce byte-identical files on any platform with IEEE-754 doubles.
"""

import os


def fmt(v) -> str:
    # numpy scalars first: in numpy >= 2 their repr is not round-trip clean
    item = getattr(v, "item", None)
    if item is not None:
        v = item()
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path, header, rows, comment=None):
    tmp = []
    if comment:
        tmp.append("# " + comment)
    tmp.append(",".join(header))
    for row in rows:
        tmp.append(",".join(fmt(v) for v in row))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(tmp) + "\n")
