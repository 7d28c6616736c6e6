import json
import math

import pytest

from cqrelay.channels import (
    BroadcastCQChannel,
    CQChannel,
    MACCQChannel,
    holevo_chi,
    load_channel,
)
from cqrelay.cli import main
from cqrelay.operators import ProbabilityDistribution


def h2(p):
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def write_channel(tmp_path, family, name, extra=()):
    path = tmp_path / name
    rc = main(["generate", family, "--out", str(path), *extra])
    assert rc == 0
    return str(path)


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def test_generate_families_roundtrip(tmp_path):
    expected = {
        "orthogonal": CQChannel,
        "overlap-pair": CQChannel,
        "depolarized": CQChannel,
        "constant": CQChannel,
        "adder-mac": MACCQChannel,
        "product-broadcast": BroadcastCQChannel,
    }
    for family, cls in expected.items():
        path = write_channel(tmp_path, family, family + ".json")
        assert isinstance(load_channel(path), cls)


def test_generate_rejects_invalid_weight(tmp_path, capsys):
    rc = main(["generate", "depolarized", "--p", "1.5"])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# chi
# ---------------------------------------------------------------------------


def test_chi_text_output(tmp_path, capsys):
    path = write_channel(tmp_path, "orthogonal", "ortho.json")
    rc = main(["chi", "--channel", path])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "chi_bits 1.000000000"
    assert lines[1] == "output_entropy_bits 1.000000000"
    assert lines[2] == "conditional_entropy_bits 0.000000000"


def test_chi_json_matches_library(tmp_path, capsys):
    path = write_channel(tmp_path, "depolarized", "dep.json", ["--p", "0.3"])
    rc = main(["chi", "--channel", path, "--format", "json"])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    channel = load_channel(path)
    dist = ProbabilityDistribution.uniform(channel.alphabet)
    assert got["chi_bits"] == pytest.approx(holevo_chi(channel, dist), abs=1e-12)
    assert got["chi_bits"] == pytest.approx(1 - h2(0.15), abs=1e-9)


def test_chi_dist_flag(tmp_path, capsys):
    path = write_channel(tmp_path, "orthogonal", "ortho.json")
    rc = main(["chi", "--channel", path, "--dist", "0.8,0.2", "--format", "json"])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    assert got["chi_bits"] == pytest.approx(h2(0.2), abs=1e-12)


def test_chi_input_errors(tmp_path, capsys):
    path = write_channel(tmp_path, "orthogonal", "ortho.json")
    mac = write_channel(tmp_path, "adder-mac", "mac.json")
    assert main(["chi", "--channel", str(tmp_path / "missing.json")]) == 1
    assert main(["chi", "--channel", path, "--dist", "0.5"]) == 1
    assert main(["chi", "--channel", path, "--dist", "a,b"]) == 1
    assert main(["chi", "--channel", mac]) == 1
    capsys.readouterr()


def test_chi_out_file(tmp_path):
    path = write_channel(tmp_path, "orthogonal", "ortho.json")
    out = tmp_path / "chi.txt"
    assert main(["chi", "--channel", path, "--out", str(out)]) == 0
    assert out.read_text().startswith("chi_bits 1.000000000")
    bad = tmp_path / "nope" / "chi.txt"
    assert main(["chi", "--channel", path, "--out", str(bad)]) == 1


# ---------------------------------------------------------------------------
# region
# ---------------------------------------------------------------------------


def test_region_mac_csv_vertices(tmp_path, capsys):
    mac = write_channel(tmp_path, "adder-mac", "mac.json")
    rc = main(["region", "mac", "--mac-channel", mac, "--grid-k", "8"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "R1,R2"
    assert lines[1:] == [
        "0.000000,0.000000",
        "1.000000,0.000000",
        "1.000000,0.500000",
        "0.500000,1.000000",
        "0.000000,1.000000",
    ]


def test_region_mac_as_written_json(tmp_path, capsys):
    mac = write_channel(tmp_path, "adder-mac", "mac.json")
    rc = main(
        [
            "region", "mac", "--mac-channel", mac, "--grid-k", "8",
            "--variant", "as-written", "--format", "json",
        ]
    )
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    assert set(got) == {"vertices", "halfplanes", "max_sum_rate"}
    assert got["max_sum_rate"] <= 1.5 + 1e-9
    assert [1.0, 0.0] in got["vertices"]


def test_region_broadcast_json_corner(tmp_path, capsys):
    bc = write_channel(tmp_path, "product-broadcast", "bc.json", ["--p", "0.2"])
    rc = main(["region", "broadcast", "--bc-channel", bc, "--grid-k", "16", "--format", "json"])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    corner = [1.0, 1 - h2(0.1)]
    assert any(
        abs(v[0] - corner[0]) <= 1e-6 and abs(v[1] - corner[1]) <= 1e-6
        for v in got["vertices"]
    )


def test_region_bidirectional_blocks(tmp_path, capsys):
    mac = write_channel(tmp_path, "adder-mac", "mac.json")
    bc = write_channel(tmp_path, "product-broadcast", "bc.json")
    rc = main(
        [
            "region", "bidirectional", "--mac-channel", mac,
            "--bc-channel", bc, "--grid-k", "8",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    blocks = [b for b in out.split("# ") if b]
    assert [b.splitlines()[0] for b in blocks] == ["mac", "broadcast", "intersection"]
    for block in blocks:
        assert block.splitlines()[1] == "R1,R2"


def test_region_bidirectional_json_keys(tmp_path, capsys):
    mac = write_channel(tmp_path, "adder-mac", "mac.json")
    bc = write_channel(tmp_path, "product-broadcast", "bc.json")
    rc = main(
        [
            "region", "bidirectional", "--mac-channel", mac, "--bc-channel", bc,
            "--grid-k", "8", "--format", "json",
        ]
    )
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    assert set(got) == {"mac", "broadcast", "intersection"}
    # the intersection never exceeds either factor's best sum rate
    assert got["intersection"]["max_sum_rate"] <= got["mac"]["max_sum_rate"] + 1e-9
    assert got["intersection"]["max_sum_rate"] <= got["broadcast"]["max_sum_rate"] + 1e-9


def test_region_input_errors(tmp_path, capsys):
    mac = write_channel(tmp_path, "adder-mac", "mac.json")
    bc = write_channel(tmp_path, "product-broadcast", "bc.json")
    assert main(["region", "mac"]) == 1
    assert main(["region", "broadcast", "--bc-channel", mac]) == 1
    assert main(["region", "mac", "--mac-channel", bc]) == 1
    assert main(["region", "bidirectional", "--mac-channel", mac]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_lemmas(tmp_path, capsys):
    rc = main(["verify", "lemmas", "--trials", "30", "--seed", "11"])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    assert got["all_hold"] is True
    for entry in got["lemmas"].values():
        assert entry["all_hold"] is True
        assert entry["trials"] == 30


def test_verify_projectors_small(tmp_path, capsys):
    rc = main(["verify", "projectors", "--n", "2,3", "--alpha", "0.5", "--seed", "2"])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    assert got["all_hold"] is True
    assert got["projectors"]["state"]["failures"] == 0
    assert got["projectors"]["conditional"]["failures"] == 0
    assert got["projectors"]["conditional"]["cross_capture_checked"] > 0


def test_verify_injected_failure_exits_two(tmp_path, capsys):
    rc = main(
        [
            "verify", "lemmas", "--trials", "5",
            "--inject-verification-failure",
        ]
    )
    assert rc == 2
    got = json.loads(capsys.readouterr().out)
    assert got["all_hold"] is False
    assert got["injected"]["all_hold"] is False


def test_verify_flag_parse_errors(capsys):
    assert main(["verify", "projectors", "--n", "2.5"]) == 1
    assert main(["verify", "projectors", "--alpha", "zebra"]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def test_simulate_noiseless_ok(tmp_path, capsys):
    bc = write_channel(tmp_path, "product-broadcast", "bc.json", ["--p", "0.0"])
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 4, "M1": 2, "M2": 2, "alpha": 0.5, "seed": 1}))
    rc = main(["simulate", "--config", str(cfg), "--bc-channel", bc])
    assert rc == 0
    got = json.loads(capsys.readouterr().out)
    assert got["status"] == "ok"
    assert got["decode"]["all_correct"] is True


def test_simulate_input_errors(tmp_path, capsys):
    bc = write_channel(tmp_path, "product-broadcast", "bc.json")
    ortho = write_channel(tmp_path, "orthogonal", "ortho.json")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 4, "M1": 2, "M2": 2}))
    assert main(["simulate", "--config", str(tmp_path / "no.json"), "--bc-channel", bc]) == 1
    assert main(["simulate", "--config", str(cfg), "--bc-channel", ortho]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad), "--bc-channel", bc]) == 1
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"n": 4, "mystery": 1}))
    assert main(["simulate", "--config", str(unknown), "--bc-channel", bc]) == 1
    capsys.readouterr()


def test_simulate_resource_limit_exits_three(tmp_path, capsys):
    bc = write_channel(tmp_path, "product-broadcast", "bc.json")
    cfg = tmp_path / "big.json"
    cfg.write_text(json.dumps({"n": 13, "M1": 2, "M2": 2, "alpha": 0.5}))
    rc = main(["simulate", "--config", str(cfg), "--bc-channel", bc])
    assert rc == 3
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# argument plumbing and determinism
# ---------------------------------------------------------------------------


def test_bad_invocations_exit_one(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["region", "mystery-kind"]) == 1
    assert main(["chi"]) == 1
    capsys.readouterr()


def test_reruns_are_byte_identical(tmp_path):
    mac = write_channel(tmp_path, "adder-mac", "mac.json")
    bc = write_channel(tmp_path, "product-broadcast", "bc.json", ["--p", "0.2"])
    ortho = write_channel(tmp_path, "orthogonal", "ortho.json")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 4, "M1": 2, "M2": 2, "alpha": 0.3, "seed": 3}))
    commands = {
        "chi": ["chi", "--channel", ortho, "--format", "json"],
        "region": [
            "region", "bidirectional", "--mac-channel", mac,
            "--bc-channel", bc, "--grid-k", "8",
        ],
        "verify": ["verify", "lemmas", "--trials", "10", "--seed", "7"],
        "simulate": ["simulate", "--config", str(cfg), "--bc-channel", bc],
        "generate": ["generate", "overlap-pair"],
    }
    for name, argv in commands.items():
        a = tmp_path / f"{name}_a.out"
        b = tmp_path / f"{name}_b.out"
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
