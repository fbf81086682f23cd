import json
from pathlib import Path

import pytest

from memspike.cli import cli_dispatch
from memspike.reference import reference_profile


NETLIST = {
    "node_ids": ["vin", "n1", "gnd"],
    "ground": "gnd",
    "branches": [
        {"id": "m1", "from_node": "vin", "to_node": "n1", "kind": "memristor",
         "params": {"r_on": 100.0, "r_off": 1000.0, "kappa": 1.0,
                    "gamma": 0.005, "tau_ion": 0.5}},
        {"id": "r1", "from_node": "n1", "to_node": "gnd", "kind": "resistor",
         "ohms": 300.0},
    ],
    "sources": [
        {"node": "vin", "waveform": {"variant": "dc_step", "amplitude": 1.0}},
    ],
}

SIM_CONFIG = {"dt": 1e-3, "t_end": 0.5, "record_every": 2}


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "net.json").write_text(json.dumps(NETLIST))
    (tmp_path / "sim.json").write_text(json.dumps(SIM_CONFIG))
    return tmp_path


def run(argv):
    return cli_dispatch([str(a) for a in argv])


class TestSimulate:
    def test_writes_trace_and_manifest(self, workdir):
        out = workdir / "out"
        code = run(["simulate", "--netlist", workdir / "net.json",
                    "--config", workdir / "sim.json", "--out", out])
        assert code == 0
        assert (out / "trace.csv").is_file()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "simulate"
        assert manifest["netlist_hash"]
        header = (out / "trace.csv").read_text().splitlines()[0]
        assert header == "t,vin,n1,gnd,m1,r1"

    def test_rerun_is_byte_identical(self, workdir):
        out = workdir / "out"
        args = ["simulate", "--netlist", workdir / "net.json",
                "--config", workdir / "sim.json", "--out", out, "--seed", "5"]
        assert run(args) == 0
        first = {p.name: p.read_bytes() for p in out.iterdir()}
        assert run(args) == 0
        second = {p.name: p.read_bytes() for p in out.iterdir()}
        assert first == second

    def test_missing_netlist_exits_2(self, workdir):
        code = run(["simulate", "--netlist", workdir / "nope.json",
                    "--config", workdir / "sim.json", "--out", workdir / "o"])
        assert code == 2

    def test_invalid_netlist_exits_2(self, workdir):
        bad = dict(NETLIST, ground="missing")
        (workdir / "bad.json").write_text(json.dumps(bad))
        code = run(["simulate", "--netlist", workdir / "bad.json",
                    "--config", workdir / "sim.json", "--out", workdir / "o"])
        assert code == 2

    def test_floating_network_exits_3(self, workdir):
        floating = json.loads(json.dumps(NETLIST))
        floating["node_ids"].append("island")
        floating["node_ids"].append("island2")
        floating["branches"].append(
            {"id": "r9", "from_node": "island", "to_node": "island2",
             "kind": "resistor", "ohms": 10.0})
        (workdir / "float.json").write_text(json.dumps(floating))
        code = run(["simulate", "--netlist", workdir / "float.json",
                    "--config", workdir / "sim.json", "--out", workdir / "o"])
        assert code == 3


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        assert run(["frobnicate"]) == 1

    def test_missing_required_flag(self, workdir):
        assert run(["simulate", "--netlist", workdir / "net.json"]) == 1

    def test_no_args(self):
        assert run([]) == 1


class TestSpike:
    def test_spike_pipeline(self, workdir):
        out = workdir / "simout"
        run(["simulate", "--netlist", workdir / "net.json",
             "--config", json_file(workdir, "long.json",
                                   {"dt": 1e-3, "t_end": 6.0}),
             "--out", out])
        spout = workdir / "spikeout"
        code = run(["spike", "--trace", out / "trace.csv", "--column", "m1",
                    "--out", spout])
        assert code == 0
        metrics = json.loads((spout / "spike_metrics.json").read_text())
        assert metrics["t_peak"] is not None
        assert metrics["tau50"] is not None
        summary = (spout / "spike_summary.csv").read_text().splitlines()
        assert summary[0].startswith("n_spikes,t_peak")
        assert len(summary) == 2

    def test_missing_trace_named_in_error(self, workdir, capsys):
        code = run(["spike", "--trace", workdir / "missing.csv",
                    "--out", workdir / "o"])
        assert code == 2
        assert "missing.csv" in capsys.readouterr().err

    def test_ambiguous_column_rejected(self, workdir):
        out = workdir / "simout2"
        run(["simulate", "--netlist", workdir / "net.json",
             "--config", workdir / "sim.json", "--out", out])
        code = run(["spike", "--trace", out / "trace.csv",
                    "--out", workdir / "o2"])
        assert code == 2


class TestHysteresis:
    def test_sweep_outputs(self, workdir):
        params = {"r_on": 100.0, "r_off": 1000.0, "mobility_gain": 200.0,
                  "gamma": 0.0}
        sweep = {"amplitude": 1.0, "omega_min": 0.5, "omega_max": 50.0,
                 "n_points": 5, "points_per_period": 256}
        out = workdir / "hyst"
        code = run(["hysteresis",
                    "--params", json_file(workdir, "dev.json", params),
                    "--sweep", json_file(workdir, "sweep.json", sweep),
                    "--out", out])
        assert code == 0
        lines = (out / "hysteresis.csv").read_text().splitlines()
        assert lines[0] == "omega,loop_area"
        assert len(lines) == 6
        summary = json.loads((out / "hysteresis_summary.json").read_text())
        assert summary["omega0"] > 0


class TestProfileAndCompose:
    def test_profile_then_compose(self, workdir):
        params = {"r_on": 100.0, "r_off": 1000.0}
        pconf = {"v": 1.0, "duration": 4.0, "n_samples": 16}
        pout = workdir / "prof"
        assert run(["profile", "--params", json_file(workdir, "d.json", params),
                    "--config", json_file(workdir, "pc.json", pconf),
                    "--out", pout]) == 0
        profile = json.loads((pout / "profile.json").read_text())
        assert len(profile["table"]) == 16
        assert max(profile["table"]) == 1.0

        seed_file = workdir / "melody.txt"
        seed_file.write_text("\n".join("02457542" * 2) + "\n")
        cconf = {"n_notes": 8, "length": 50, "start": 0, "rng_seed": 3}
        cout = workdir / "comp"
        assert run(["compose", "--seed-file", seed_file,
                    "--profile", pout / "profile.json",
                    "--config", json_file(workdir, "cc.json", cconf),
                    "--out", cout]) == 0
        seq = [int(x) for x in (cout / "sequence.txt").read_text().split()]
        assert len(seq) == 50
        counts = json.loads((cout / "graph_counts.json").read_text())
        assert len(counts["counts"]) == 8

    def test_compose_rejects_garbage_seed(self, workdir):
        seed_file = workdir / "bad.txt"
        seed_file.write_text("0\nmiddle-c\n")
        prof = reference_profile(8)
        code = run(["compose", "--seed-file", seed_file,
                    "--profile", json_file(workdir, "p.json", prof.to_dict()),
                    "--config", json_file(workdir, "c.json",
                                          {"n_notes": 8, "length": 5}),
                    "--out", workdir / "o"])
        assert code == 2


class TestTmaze:
    def test_small_run(self, workdir):
        conf = {"trials": 6, "switch_at": 3, "decision_window": 0.2,
                "reward_pulse": {"amplitude": 1.5, "duration": 0.1},
                "rng_seed": 1}
        out = workdir / "maze"
        code = run(["tmaze", "--config", json_file(workdir, "mz.json", conf),
                    "--out", out])
        assert code == 0
        lines = (out / "trial_log.csv").read_text().splitlines()
        assert lines[0] == "trial,rule,choice,correct,left_score,right_score"
        assert len(lines) == 7
        summary = json.loads((out / "tmaze_summary.json").read_text())
        assert summary["trials"] == 6

    def test_rerun_byte_identical(self, workdir):
        conf = {"trials": 4, "switch_at": 2, "decision_window": 0.2,
                "reward_pulse": {"amplitude": 1.5, "duration": 0.1}}
        out = workdir / "maze2"
        args = ["tmaze", "--config", json_file(workdir, "mz2.json", conf),
                "--out", out, "--seed", "9"]
        assert run(args) == 0
        first = {p.name: p.read_bytes() for p in out.iterdir()}
        assert run(args) == 0
        assert first == {p.name: p.read_bytes() for p in out.iterdir()}


def json_file(workdir: Path, name: str, obj) -> Path:
    p = workdir / name
    p.write_text(json.dumps(obj))
    return p
