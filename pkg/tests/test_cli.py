import json

import numpy as np
import pytest

from rainbow_lab.cli import main, parse_range


def read_csv(path):
    header, rows = [], []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            header.append(line)
        elif line:
            rows.append(line.split(","))
    return header, rows


class TestParseRange:
    def test_inclusive_endpoints(self):
        assert parse_range("0:4:0.5") == pytest.approx(np.arange(0, 4.5, 0.5))

    def test_single_value(self):
        assert parse_range("3") == [3.0]

    def test_integer_range(self):
        assert parse_range("60:160:20", integer=True) == [60, 80, 100, 120, 140, 160]

    def test_bad_step(self):
        with pytest.raises(ValueError):
            parse_range("0:1:0")

    def test_non_integer_rejected(self):
        with pytest.raises(ValueError):
            parse_range("1:2:0.5", integer=True)


class TestVelocityScan:
    def test_artifact(self, tmp_path):
        out = tmp_path / "v.csv"
        rc = main(["velocity-scan", "--L", "40", "--z", "0:1:0.5", "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        assert any("columns: z,a_numeric,a_fit4,a_analytic" in h for h in header)
        assert len(rows) == 3
        z, a_num, a_fit, a_ana = (float(x) for x in rows[2])
        assert z == 1.0
        assert abs(a_num / a_ana - 1) < 0.05

    def test_byte_identical_rerun(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["velocity-scan", "--L", "30", "--z", "0:2:1", "--out", str(a)])
        main(["velocity-scan", "--L", "30", "--z", "0:2:1", "--out", str(b)])
        assert a.read_bytes().replace(str(a).encode(), b"") == \
            b.read_bytes().replace(str(b).encode(), b"")

    def test_jobs_do_not_change_output(self, tmp_path):
        # data rows identical whatever the worker count; only the config
        # echo in the header differs
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["velocity-scan", "--L", "30", "--z", "0:2:0.5", "--out", str(a)])
        main(["velocity-scan", "--L", "30", "--z", "0:2:0.5", "--out", str(b),
              "--jobs", "2"])
        assert read_csv(a)[1] == read_csv(b)[1]


class TestGeometryFlags:
    def test_exactly_one_required(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        rc = main(["spectrum", "--L", "10", "--alpha", "0.5", "--z", "1",
                   "--out", str(out)])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ValueError"

    def test_domain_error_exit_2(self, tmp_path, capsys):
        rc = main(["spectrum", "--L", "10", "--alpha", "1.5",
                   "--out", str(tmp_path / "s.csv")])
        assert rc == 2
        assert "alpha" in json.loads(capsys.readouterr().err)["message"]

    def test_numeric_error_exit_3(self, tmp_path, capsys):
        # uniform couplings tie at the first decimation
        rc = main(["sdrg", "--couplings", "1,1,1", "--out", str(tmp_path / "b.json")])
        assert rc == 3
        assert json.loads(capsys.readouterr().err)["error"] == "TieError"


class TestSpectrum:
    def test_rows(self, tmp_path):
        out = tmp_path / "s.csv"
        orb = tmp_path / "orb.bin"
        rc = main(["spectrum", "--L", "8", "--z", "1", "--out", str(out),
                   "--orbitals", str(orb)])
        assert rc == 0
        _, rows = read_csv(out)
        assert len(rows) == 16
        ms = [int(r[0]) for r in rows]
        assert ms == list(range(-8, 8))
        assert orb.stat().st_size == 16 + 8 * 16 * 16


class TestWavefunction:
    def test_overlap_header(self, tmp_path):
        out = tmp_path / "w.csv"
        rc = main(["wavefunction", "--L", "50", "--z", "1", "--m", "0",
                   "--out", str(out)])
        assert rc == 0
        header, rows = read_csv(out)
        overlap = [h for h in header if h.startswith("# overlap:")][0]
        assert float(overlap.split(":")[1]) > 0.99
        assert len(rows) == 100


class TestValidityMap:
    def test_grid_and_contours(self, tmp_path):
        out = tmp_path / "grid.csv"
        rc = main(["validity-map", "--L", "20:30:10", "--z", "0:0.5:0.25",
                   "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert len(rows) == 6
        contours = tmp_path / "grid_contours.csv"
        _, crows = read_csv(contours)
        assert len(crows) == 2


class TestEntropyScan:
    def test_half_grid(self, tmp_path):
        out = tmp_path / "e.csv"
        rc = main(["entropy-scan", "--L", "10:20:10", "--z", "0:1:1",
                   "--orders", "1,2", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert len(rows) == 2 * 2 * 2

    def test_boundary_single_geometry(self, tmp_path):
        out = tmp_path / "b.csv"
        rc = main(["entropy-scan", "--L", "6", "--alpha", "0.8",
                   "--blocks", "boundary", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert len(rows) == 11

    def test_boundary_needs_single_geometry(self, tmp_path):
        rc = main(["entropy-scan", "--L", "6:8:2", "--alpha", "0.8",
                   "--blocks", "boundary", "--out", str(tmp_path / "x.csv")])
        assert rc == 2


class TestRenyiFit:
    def test_csv_columns(self, tmp_path):
        out = tmp_path / "fit.csv"
        rc = main(["renyi-fit", "--L", "20:25:1", "--z", "0:1:1",
                   "--orders", "1,2", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert len(rows) == 4
        c_vals = [float(r[2]) for r in rows]
        assert all(0.9 < c < 1.1 for c in c_vals)

    def test_json_format(self, tmp_path):
        out = tmp_path / "fit.json"
        rc = main(["renyi-fit", "--L", "20:25:1", "--z", "0:0:1",
                   "--orders", "1", "--format", "json", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["data"][0].keys() >= {"n", "z", "c_n", "d_n", "f_n"}

    def test_single_parity_usage_error(self, tmp_path):
        rc = main(["renyi-fit", "--L", "20:30:2", "--z", "0:0:1",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2


class TestEsCollapse:
    def test_rows(self, tmp_path):
        out = tmp_path / "es.csv"
        rc = main(["es-collapse", "--L", "40", "--z", "10:20:10",
                   "--levels", "3", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert len(rows) == 2 * 6  # both signs
        ps = {float(r[2]) for r in rows}
        assert ps == {0.5, 1.5, 2.5, -0.5, -1.5, -2.5}


class TestSdrgCommand:
    def test_rainbow_json(self, tmp_path, capsys):
        out = tmp_path / "bonds.json"
        rc = main(["sdrg", "--L", "3", "--alpha", "0.1", "--arcs", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["bonds"] == [[2, 3, 1], [1, 4, -1], [0, 5, 1]]
        assert len(data["trace"]) == 3
        assert "+" in capsys.readouterr().out

    def test_explicit_couplings(self, tmp_path):
        out = tmp_path / "bonds.json"
        rc = main(["sdrg", "--couplings", "1,0.5,-0.25", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert [b[:2] for b in data["bonds"]] == [[0, 1], [2, 3]]


class TestEntropy2D:
    def test_scan_and_fit(self, tmp_path):
        out = tmp_path / "e2d.csv"
        rc = main(["entropy-2d", "--L", "2:6:1", "--alpha", "0.5", "--out", str(out)])
        assert rc == 0
        _, rows = read_csv(out)
        assert len(rows) == 5
        fits = json.loads((tmp_path / "e2d_fits.json").read_text())
        rec = fits["data"][0]
        assert rec.keys() >= {"alpha", "A", "B", "C", "A_bits_per_side"}
        assert rec["A_bits_per_side"] == pytest.approx(
            rec["A"] / (4 * np.log(2)), rel=1e-12
        )


class TestQubism:
    def test_ppm_and_sidecar(self, tmp_path):
        out = tmp_path / "q.ppm"
        rc = main(["qubism", "--sites", "6", "--alpha", "0.1", "--out", str(out)])
        assert rc == 0
        data = out.read_bytes()
        assert data.startswith(b"P6\n8 8\n255\n")
        assert len(data) == 11 + 3 * 64
        sidecar = json.loads((tmp_path / "q.ppm.provenance.json").read_text())
        assert sidecar["tool"] == "rainbow-lab"

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
        main(["qubism", "--sites", "8", "--alpha", "0.3", "--out", str(a)])
        main(["qubism", "--sites", "8", "--alpha", "0.3", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_odd_sites_rejected(self, tmp_path):
        rc = main(["qubism", "--sites", "7", "--alpha", "0.3",
                   "--out", str(tmp_path / "x.ppm")])
        assert rc == 2


class TestValidate:
    def test_passes(self, capsys):
        rc = main(["validate"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "FAIL" not in out
        assert "oracle equivalence" in out
