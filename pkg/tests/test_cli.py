import io
import json
import math

import numpy as np
import pytest

from antidist import cli
from antidist.classical import ClassicalEnsemble, Distribution
from antidist.errors import ValidationError
from antidist.fileio import load_ensemble, parse_ensemble, save_ensemble
from antidist.quantum import QuantumEnsemble

from helpers import make_rng, random_density, random_probability

from pathlib import Path

_DEMOS = Path(__file__).resolve().parent.parent / "demos"
DICE = str(_DEMOS / "dice.json")
COMMUTING = str(_DEMOS / "commuting3.json")
TRINE = str(_DEMOS / "pure-trine.json")


def run_cli(args):
    out = io.StringIO()
    import contextlib
    with contextlib.redirect_stdout(out):
        code = cli.main(args)
    return code, out.getvalue()


class TestFileIO:
    def test_dice_round_trip(self, tmp_path):
        ens, labels = load_ensemble(DICE)
        assert isinstance(ens, ClassicalEnsemble)
        assert labels == ["red", "green", "blue"]
        path = tmp_path / "copy.json"
        save_ensemble(path, ens, labels)
        again, labels2 = load_ensemble(path)
        assert labels2 == labels
        for a, b in zip(ens.dists, again.dists):
            assert np.array_equal(a.weights, b.weights)

    def test_quantum_round_trip(self, tmp_path):
        rng = make_rng(110)
        ens = QuantumEnsemble(random_probability(rng, 3),
                              [random_density(rng, 2) for _ in range(3)])
        path = tmp_path / "q.json"
        save_ensemble(path, ens)
        again, _ = load_ensemble(path)
        assert isinstance(again, QuantumEnsemble)
        for a, b in zip(ens.states, again.states):
            assert np.linalg.norm(a - b, 2) <= 1e-12

    def test_rejects_bad_priors(self):
        with pytest.raises(ValidationError):
            parse_ensemble({"kind": "classical", "priors": [0.6, 0.6],
                            "dists": [[1.0], [1.0]]})

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValidationError):
            parse_ensemble({"kind": "other", "priors": [1.0]})

    def test_rejects_non_hermitian_state(self):
        state = [[[0.5, 0.0], [0.3, 0.1]], [[0.0, 0.0], [0.5, 0.0]]]
        with pytest.raises(ValidationError):
            parse_ensemble({"kind": "quantum", "priors": [0.5, 0.5],
                            "states": [state, state]})

    def test_gate_then_exact_normalization(self):
        doc = {"kind": "classical", "priors": [0.5 + 4e-10, 0.5],
               "dists": [[1.0, 0.0], [0.0, 1.0]]}
        ens, _ = parse_ensemble(doc)
        assert ens.priors.sum() == pytest.approx(1.0, abs=1e-15)


class TestCliCommands:
    def test_classical_exponent_dice(self):
        code, out = run_cli(["classical-exponent", DICE])
        assert code == 0
        assert "xi_cl = 1.09861229 nats" in out
        assert "(red, green)  0.693147181" in out

    def test_classical_exponent_bits(self):
        code, out = run_cli(["classical-exponent", DICE, "--bits"])
        assert code == 0
        assert f"xi_cl = {math.log(3.0) / math.log(2.0):.9g} bits" in out

    def test_quantum_bounds_commuting(self):
        code, out = run_cli(["quantum-bounds", COMMUTING])
        assert code == 0
        assert "one_shot_error = 0" in out
        assert "commuting_exact = inf nats" in out
        assert "upper_neg_ln_kappa = inf nats" in out

    def test_one_shot_trine(self):
        code, out = run_cli(["one-shot", TRINE])
        assert code == 0
        first = next(line for line in out.splitlines() if line.startswith("error"))
        assert float(first.split("=")[1]) <= 1e-8
        assert "M[1]" in out

    def test_one_shot_classical(self):
        code, out = run_cli(["one-shot", DICE])
        assert code == 0
        assert "error = 0.111111111" in out
        assert "eliminates" in out

    def test_scan_dice_rows(self):
        code, out = run_cli(["scan", DICE, "--n-max", "8"])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "n,error,neg_log_rate,mode,std_err"
        assert len(lines) == 9
        for line in lines[1:]:
            n, error, rate, mode, std = line.split(",")
            assert float(error) == pytest.approx(3.0 ** (-(int(n) + 1)), rel=1e-8)
            assert mode == "exact"
            assert std == ""

    def test_scan_quantum(self):
        code, out = run_cli(["scan", COMMUTING, "--n-max", "2"])
        assert code == 0
        lines = out.strip().splitlines()
        # perfect antidistinguishability at n = 1 ends the scan early
        assert lines[1].startswith("1,0,inf,")

    def test_deterministic_output(self):
        a = run_cli(["classical-exponent", DICE])
        b = run_cli(["classical-exponent", DICE])
        assert a == b
        a = run_cli(["scan", DICE, "--n-max", "4", "--mode", "mc",
                     "--trials", "5000", "--seed", "9"])
        b = run_cli(["scan", DICE, "--n-max", "4", "--mode", "mc",
                     "--trials", "5000", "--seed", "9"])
        assert a == b

    def test_scan_mc_has_std_err(self):
        code, out = run_cli(["scan", DICE, "--n-max", "3", "--mode", "mc",
                             "--trials", "2000", "--seed", "1"])
        assert code == 0
        rows = out.strip().splitlines()[1:]
        assert all(row.split(",")[3] == "monte_carlo" for row in rows)
        assert all(row.split(",")[4] != "" for row in rows)


class TestCliErrors:
    def test_missing_file_is_validation_error(self):
        code, _ = run_cli(["classical-exponent", "nope.json"])
        assert code == cli.EXIT_VALIDATION

    def test_bad_json_reports_line(self, tmp_path, capsys):
        p = tmp_path / "broken.json"
        p.write_text('{"kind": "classical",,}')
        code, _ = run_cli(["classical-exponent", str(p)])
        assert code == cli.EXIT_VALIDATION

    def test_kind_mismatch(self):
        code, _ = run_cli(["classical-exponent", COMMUTING])
        assert code == cli.EXIT_VALIDATION
        code, _ = run_cli(["quantum-bounds", DICE])
        assert code == cli.EXIT_VALIDATION

    def test_quantum_scan_cap(self, tmp_path):
        rng = make_rng(111)
        ens = QuantumEnsemble(np.array([0.5, 0.5]),
                              [random_density(rng, 3), random_density(rng, 3)])
        p = tmp_path / "qutrits.json"
        save_ensemble(p, ens)
        code, _ = run_cli(["scan", str(p), "--n-max", "4"])
        assert code == cli.EXIT_RESOURCE

    def test_classical_exact_cap(self, tmp_path):
        code, _ = run_cli(["scan", DICE, "--n-max", "20"])
        assert code == cli.EXIT_RESOURCE

    def test_quantum_mc_rejected(self):
        code, _ = run_cli(["scan", COMMUTING, "--n-max", "2", "--mode", "mc"])
        assert code == cli.EXIT_VALIDATION
