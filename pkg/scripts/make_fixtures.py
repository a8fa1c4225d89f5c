"""Regenerate the JSON fixtures under tests/fixtures.

The closed-triangle file is a golden output of ``hypergon close``; rerun this
script only when the solver or the document layout changes on purpose.
"""

import math
import sys
from pathlib import Path

import numpy as np

from hypergon import bending, cli, serialize
from hypergon.bending import ActionAngle
from hypergon.gaussmap import Configuration
from hypergon.moduli import EPolygon

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def write(name: str, doc: dict) -> Path:
    path = OUT / name
    path.write_text(serialize.dumps(doc), encoding="utf-8")
    return path


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    ang = [2 * math.pi * k / 3 for k in range(3)]
    triangle = Configuration(np.array([[math.cos(a), math.sin(a), 0.0] for a in ang]), np.ones(3))
    src = write("triangle_config.json", serialize.configuration_doc(triangle))

    unstable = Configuration(np.array([[0, 0, 1.0], [1.0, 0, 0], [0, 1.0, 0]]),
                             np.array([2.5, 1.0, 1.0]))
    write("unstable_config.json", serialize.configuration_doc(unstable))

    s = 1 / math.sqrt(3)
    tetra = Configuration(np.array([[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]), np.ones(4))
    write("tetrahedron_config.json", serialize.configuration_doc(tetra))

    # reconstruct puts the first edge on the vertical axis, so its endpoint is oo
    vertical = bending.reconstruct((1.0, 1.1, 0.9, 1.2), ActionAngle((1.3,), (0.7,)))
    write("vertical_edge_polygon.json", serialize.hpolygon_doc(vertical))

    etri = EPolygon(np.array([[2.0, 0.0, 0.0], [-1.0, math.sqrt(3), 0.0], [-1.0, -math.sqrt(3), 0.0]]))
    write("euclidean_triangle.json", serialize.epolygon_doc(etri))

    write("weights.json", serialize.document("Weights", r=[1.0, 1.2, 0.9, 1.1, 0.8]))
    write("wall_weights.json", serialize.document("Weights", r=[1.0, 1.0, 1.0, 1.0]))

    return cli.main(["close", str(src), "-o", str(OUT / "triangle_closed.json")])


if __name__ == "__main__":
    sys.exit(main())
