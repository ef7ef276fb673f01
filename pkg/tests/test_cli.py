"""CLI plumbing tests: argument parsing, file round trips, reproducibility,
and exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest

from cvlearn.cli import main, parse_complex, parse_cvector
from cvlearn.errors import ValidationError
from cvlearn.measurements import MeasurementRecord
from cvlearn.states import PeakState, char_fn, classicality_smax, make_three_peak


class TestComplexParsing:
    def test_literals(self):
        assert parse_complex("1+0.5i") == 1 + 0.5j
        assert parse_complex("-2i") == -2j
        assert parse_complex("0.7") == 0.7
        assert parse_complex("1 - 0.5i") == 1 - 0.5j
        assert parse_complex("0.3j") == 0.3j

    def test_round_trip_vector(self):
        v = parse_cvector("1+2i,-0.5i,3", 3)
        assert np.array_equal(v, np.array([1 + 2j, -0.5j, 3.0]))

    def test_bad_literal(self):
        with pytest.raises(ValidationError):
            parse_complex("one+i")


class TestStateCommands:
    def test_eval_writes_grid_and_summary(self, tmp_path):
        out = tmp_path / "state"
        rc = main(["state", "eval", "--family", "three-peak", "--nu", "0.6",
                   "--eps0", "0.2", "--gamma", "1+0.5i", "--grid", "32",
                   "--out", str(out)])
        assert rc == 0
        summary = json.loads((tmp_path / "state.json").read_text())
        assert summary["s_max"] == pytest.approx(
            classicality_smax(0.6, 0.2, np.array([1 + 0.5j])).s_max)
        assert summary["tail_bound_margin"] <= 1e-12
        rows = (tmp_path / "state.csv").read_text().strip().splitlines()
        assert rows[0] == "beta_re,beta_im,chi_re,chi_im,wigner,husimi"
        assert len(rows) == 32 * 32 + 1

    def test_classicality_matches_library(self, tmp_path, capsys):
        rc = main(["state", "classicality", "--nu", "0.7", "--eps0", "0.1",
                   "--gamma", "1.2"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["s_max"] == pytest.approx(
            classicality_smax(0.7, 0.1, np.array([1.2])).s_max)

    def test_state_file_round_trip(self, tmp_path):
        st = make_three_peak(1, 0.6, 0.2, np.array([0.8 - 0.1j]))
        path = tmp_path / "st.json"
        path.write_text(st.to_json())
        out = tmp_path / "re"
        rc = main(["state", "eval", "--state", str(path), "--grid", "16",
                   "--out", str(out)])
        assert rc == 0
        back = PeakState.from_json_dict(
            json.loads((tmp_path / "re.json").read_text())["state"])
        assert back.peak_multiset_equal(st, tol=1e-15)
        emitted = PeakState.from_json((tmp_path / "re.state.json").read_text())
        assert emitted.peak_multiset_equal(st, tol=1e-15)

    def test_eval_sample_estimate_pipeline(self, tmp_path):
        # The emitted .state.json feeds sample and estimate directly.
        out = tmp_path / "st"
        assert main(["state", "eval", "--family", "three-peak", "--nu", "0.6",
                     "--eps0", "0.2", "--gamma", "0.9", "--grid", "8",
                     "--out", str(out)]) == 0
        rec = tmp_path / "rec.jsonl"
        assert main(["sample", "--state", str(tmp_path / "st.state.json"),
                     "--scheme", "heterodyne", "--count", "20000",
                     "--seed", "3", "--out", str(rec)]) == 0
        pts = tmp_path / "pts.json"
        pts.write_text(json.dumps([[{"re": 0.5, "im": 0.0}]]))
        est = tmp_path / "est.json"
        assert main(["estimate", "--record", str(rec), "--points", str(pts),
                     "--scheme", "heterodyne", "--out", str(est)]) == 0
        st = make_three_peak(1, 0.6, 0.2, np.array([0.9]))
        got = complex(*json.loads(est.read_text())["estimates"][0]["estimate"])
        assert abs(got - complex(char_fn(st, np.array([0.5])))) < 0.05


class TestSampleEstimate:
    def test_bell_sample_then_estimate(self, tmp_path):
        st = make_three_peak(1, 0.6, 0.2, np.array([1.0]))
        spath = tmp_path / "st.json"
        spath.write_text(st.to_json())
        rec_path = tmp_path / "rec.jsonl"
        rc = main(["sample", "--state", str(spath), "--scheme", "bell",
                   "--u-seed", "3", "--count", "30000", "--seed", "11",
                   "--out", str(rec_path)])
        assert rc == 0
        rec = MeasurementRecord.read_jsonl(rec_path)
        assert rec.scheme == "bell" and rec.count == 30000

        pts_path = tmp_path / "pts.json"
        pts_path.write_text(json.dumps([[{"re": 1.0, "im": 0.0}],
                                        [{"re": 0.0, "im": 0.0}]]))
        est_path = tmp_path / "est.json"
        rc = main(["estimate", "--record", str(rec_path), "--points", str(pts_path),
                   "--scheme", "bell-chi", "--epsilon", "0.15",
                   "--out", str(est_path)])
        assert rc == 0
        payload = json.loads(est_path.read_text())
        assert len(payload["estimates"]) == 2
        chi_true = complex(char_fn(st, np.array([1.0])))
        est = payload["estimates"][0]["estimate"]
        err = min(abs(complex(*est) - chi_true), abs(complex(*est) + chi_true))
        assert err <= 0.15
        origin = complex(*payload["estimates"][1]["estimate"])
        assert origin == pytest.approx(1.0, abs=1e-12)

    def test_sampling_reproducible_bytes(self, tmp_path):
        st = make_three_peak(1, 0.5, 0.2, np.array([0.5]))
        spath = tmp_path / "st.json"
        spath.write_text(st.to_json())
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for p in (p1, p2):
            assert main(["sample", "--state", str(spath), "--scheme", "heterodyne",
                         "--count", "500", "--seed", "9", "--out", str(p)]) == 0
        assert p1.read_bytes() == p2.read_bytes()


class TestBoundsGameChannelOracle:
    def test_bounds_curve_fig3_shape(self, tmp_path):
        out = tmp_path / "curve.csv"
        rc = main(["bounds", "curve", "--axis", "kappa",
                   "--families", "lb_ef,ub_hd,ub_bm",
                   "--grid-min", "0.5", "--grid-max", "3.0", "--points", "6",
                   "--n", "50", "--epsilon", "0.09", "--delta", "0.3333",
                   "--out", str(out)])
        assert rc == 0
        rows = out.read_text().strip().splitlines()
        assert rows[0] == "kappa,lb_ef,ub_hd,ub_bm"
        assert len(rows) == 7
        meta = json.loads((tmp_path / "curve.csv.json").read_text())
        assert meta["inputs"]["epsilon"] == 0.09
        # BM column is kappa-independent; lb_ef strictly increases.
        bm = [float(r.split(",")[3]) for r in rows[1:]]
        assert len(set(bm)) == 1
        lb = [float(r.split(",")[1]) for r in rows[1:] if r.split(",")[1]]
        assert all(b > a for a, b in zip(lb, lb[1:]))

    def test_game_run_byte_identical(self, tmp_path):
        cfg = {"family": "three_peak", "n": 1, "nu": 0.9, "eps0": 0.25,
               "kappa": 2.0, "copies": 200, "trials": 40, "bob": "ea_bell",
               "seed": 13, "u": {"seed": 5}, "estimate_tvd": False}
        cpath = tmp_path / "cfg.json"
        cpath.write_text(json.dumps(cfg))
        outs = []
        for name in ["r1.json", "r2.json"]:
            opath = tmp_path / name
            rc = main(["game", "run", "--config", str(cpath), "--out", str(opath),
                       "--log", str(tmp_path / (name + ".log"))])
            assert rc == 0
            outs.append(opath.read_bytes())
        assert outs[0] == outs[1]
        assert (tmp_path / "r1.json.log").read_bytes() \
            == (tmp_path / "r2.json.log").read_bytes()
        payload = json.loads(outs[0])
        assert 0.0 <= payload["success_rate"] <= 1.0
        log_lines = (tmp_path / "r1.json.log").read_text().strip().splitlines()
        assert len(log_lines) == 40

    def test_channel_check(self, tmp_path):
        st = make_three_peak(1, 0.4, 0.1, np.array([1.0]))
        spath = tmp_path / "st.json"
        spath.write_text(st.to_json())
        out = tmp_path / "chan.json"
        rc = main(["channel", "check", "--state", str(spath), "--r", "1.0",
                   "--sets", "20", "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["status"].startswith("valid")
        assert payload["c_channel"] == pytest.approx(1 - np.exp(-2.0))

    def test_oracle_check(self, tmp_path):
        st = make_three_peak(1, 0.5, 0.2, np.array([0.8]))
        spath = tmp_path / "st.json"
        spath.write_text(st.to_json())
        out = tmp_path / "oracle.json"
        rc = main(["oracle", "check", "--state", str(spath), "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["char_max_abs_error"] < 1e-6
        assert payload["min_eigenvalue"] >= -1e-9


class TestExitCodes:
    def test_validation_error_is_2(self, tmp_path):
        rc = main(["state", "eval", "--family", "three-peak", "--nu", "0.6",
                   "--eps0", "0.9", "--gamma", "1", "--out", str(tmp_path / "x")])
        assert rc == 2

    def test_bad_bound_domain_is_2(self, tmp_path):
        rc = main(["bounds", "curve", "--axis", "kappa", "--families", "nope",
                   "--grid-min", "0.5", "--grid-max", "1.0", "--epsilon", "0.1",
                   "--out", str(tmp_path / "c.csv")])
        assert rc == 2

    def test_module_entrypoint(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "cvlearn.cli", "state", "classicality",
             "--nu", "0.6", "--eps0", "0.2", "--gamma", "1"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["s_max"] > 0
