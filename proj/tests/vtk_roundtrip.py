"""Reads CLI snapshots back through meshio and checks their contents."""
import subprocess
import sys
import tempfile
from pathlib import Path

import meshio
import numpy as np


def main(binary):
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        subprocess.run([binary, "run", "--n", "2", "--tau", "0.05", "--tfinal", "0.1",
                        "--vtk-every", "1", "--out", str(out)], check=True,
                       stdout=subprocess.DEVNULL)
        files = sorted(out.glob("state_*.vtk"))
        assert [f.name for f in files] == ["state_000000.vtk", "state_000001.vtk",
                                           "state_000002.vtk"], files
        for f in files:
            mesh = meshio.read(f)
            assert len(mesh.cells) == 1 and mesh.cells[0].type == "tetra"
            tets = mesh.cells[0].data
            assert tets.shape == (48, 4)
            assert mesh.points.shape == (27, 3)
            assert np.all((mesh.points >= 0) & (mesh.points <= 1))
            # Cells keep a positive orientation.
            p = mesh.points[tets]
            vol = np.einsum("ij,ij->i", p[:, 1] - p[:, 0],
                            np.cross(p[:, 2] - p[:, 0], p[:, 3] - p[:, 0])) / 6
            assert np.all(vol > 0) and abs(vol.sum() - 1) < 1e-12
            assert mesh.point_data["u"].shape == (27, 3)
            assert mesh.point_data["p"].shape in ((27,), (27, 1))
            for name in ("B", "E"):
                assert mesh.cell_data[name][0].shape == (48, 3)
            div = np.asarray(mesh.cell_data["divB"][0])
            assert np.max(np.abs(div)) < 1e-11
            for arrays in (mesh.point_data.values(), [a[0] for a in mesh.cell_data.values()]):
                for a in arrays:
                    assert np.all(np.isfinite(a))
    print("vtk round trip ok")


if __name__ == "__main__":
    main(sys.argv[1])
