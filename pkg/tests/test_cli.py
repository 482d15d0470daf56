import json
import random

import pytest

from invgeom import cli
from invgeom.presentation import fixture_bs, parse
from invgeom.propa import FinExtMetric, Witness, analyze_contraction, check_witness, random_instance
from invgeom.stephen import Budget, test_geq
from invgeom.tribool import Confirmed


@pytest.fixture
def run(capsys):
    def go(*argv):
        code = cli.main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out, out.err
    return go


def test_test_equal_relation(run, data_dir):
    code, out, _ = run("stephen", "test-equal", "-p", data_dir / "bicyclic.imp", "-u", "a a^-1", "-w", "",
                       "--rounds", 5)
    assert code == 0 and out.strip() == "confirmed"


def test_test_equal_refuted_by_munn(run, data_dir):
    code, out, _ = run("stephen", "test-equal", "-p", data_dir / "free2.imp", "-u", "a a^-1", "-w", "")
    assert code == 1 and out.strip() == "refuted"


def test_test_geq_unknown(run, data_dir):
    code, _, _ = run("stephen", "test-geq", "-p", data_dir / "bicyclic.imp", "-u", "a^-1", "-w", "")
    assert code == 2


def test_right_unit(run, data_dir):
    assert run("stephen", "right-unit", "-p", data_dir / "bicyclic.imp", "-w", "a a")[0] == 0


def test_approx_dot(run, data_dir, tmp_path):
    dot = tmp_path / "out.dot"
    code, _, _ = run("stephen", "approx", "-p", data_dir / "free2.imp", "-w", "a b b^-1", "--dot", dot)
    assert code == 0
    text = dot.read_text()
    assert text.startswith("digraph")
    nodes = {line.split()[0] for line in text.splitlines() if line.strip().split()[:1] and "->" not in line
             and line.strip()[0].isdigit()}
    assert len(nodes) == 3


def test_approx_json_deterministic(run, data_dir, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"a{i}.json"
        run("stephen", "approx", "-p", data_dir / "scary.imp", "-w", "b c", "--rounds", 2, "--json", path)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["rounds"] == 2 and doc["word"] == "b c"


def test_missing_presentation(run, tmp_path):
    code, _, err = run("stephen", "approx", "-p", tmp_path / "nope.imp", "-w", "a")
    assert code == 65 and "cannot read" in err


def test_malformed_word(run, data_dir):
    assert run("stephen", "approx", "-p", data_dir / "free2.imp", "-w", "a z")[0] == 65


def test_usage_errors(run, data_dir):
    assert run("stephen")[0] == 64
    assert run("stephen", "approx", "-p", data_dir / "free2.imp", "-w", "a", "--rounds", 0)[0] == 64
    assert run("distortion", "profile", "-p", data_dir / "free2.imp", "--oracle", "zz:1")[0] == 64


def test_distortion_free_and_json(run, data_dir, tmp_path):
    path = tmp_path / "t.json"
    code, out, _ = run("distortion", "profile", "-p", data_dir / "free2.imp", "-w", "a b a^-1",
                       "--radius", 4, "--json", path)
    assert code == 0
    doc = json.loads(path.read_text())
    assert all(row["phi_hat"] == row["r"] for row in doc["rows"])
    assert out.splitlines()[0].startswith("r")


def test_distortion_scary_shows_growth(run, data_dir):
    code, out, _ = run("distortion", "profile", "-p", data_dir / "scary.imp", "-w", "", "--rounds", 3,
                       "--vertices", 20000, "--radius", 2, "--format", "json",
                       "--oracle", "fg:a+b+u", "--oracle-map", "c=b^-1 u b, d=a^-1 u a",
                       "--oracle-inverse", "u=b c b^-1")
    assert code == 0
    rows = {row["r"]: row["phi_hat"] for row in json.loads(out)["rows"]}
    assert rows[2] > 2


def test_distortion_needs_flag(run, data_dir):
    code, _, err = run("distortion", "profile", "-p", data_dir / "noflag.imp")
    assert code == 66 and "e_unitary" in err


def test_finverse_max(run, data_dir):
    code, out, _ = run("finverse", "max", "-p", data_dir / "bs2.imp", "-g", "b")
    assert code == 0 and out.splitlines()[0] == "b"


def test_finverse_max_reverifies(run, data_dir):
    code, out, _ = run("finverse", "max", "-p", data_dir / "bs2.imp", "-g", "a b a")
    p = fixture_bs(2)
    m = p.word(out.splitlines()[0])
    assert test_geq(p, m, p.word("a b a"), Budget(6, 50_000)) is Confirmed


def test_finverse_wedge_and_phi(run, data_dir):
    code, out, _ = run("finverse", "wedge", "-p", data_dir / "bicyclic.imp", "-s", "a", "-t", "a a a^-1")
    assert code == 0 and out.strip() == "a"
    assert run("finverse", "wedge", "-p", data_dir / "bicyclic.imp", "-s", "a", "-t", "a a")[0] == 65
    code, out, _ = run("finverse", "phi", "-p", data_dir / "free2.imp", "-n", 3)
    assert code == 0 and out.strip() == "3"


def test_prefix_member(run, data_dir):
    assert run("prefix", "member", "-p", data_dir / "bicyclic.imp", "-g", "a^-1", "--phi", "linear")[0] == 1
    assert run("prefix", "member", "-p", data_dir / "bicyclic.imp", "-g", "a")[0] == 0
    assert run("prefix", "member", "-p", data_dir / "bicyclic.imp", "-g", "a^-1")[0] == 2


def write_instance(tmp_path, seed, exact=False):
    X, Y, f, wY = random_instance(random.Random(seed), exact=exact)
    paths = {name: tmp_path / f"{name}.json" for name in ("x", "y", "map", "xi")}
    paths["x"].write_text(X.to_json())
    paths["y"].write_text(Y.to_json())
    paths["map"].write_text(json.dumps({"f": f}))
    paths["xi"].write_text(wY.to_json())
    return paths


@pytest.mark.parametrize("exact", [False, True])
def test_propa_transport_round_trip(run, tmp_path, exact):
    paths = write_instance(tmp_path, 5, exact)
    out = tmp_path / "zeta.json"
    flags = ["--exact"] if exact else []
    code, _, err = run("propa", "transport", "-X", paths["x"], "-Y", paths["y"], "-f", paths["map"],
                       "-w", paths["xi"], "-o", out, *flags)
    assert code == 0 and "ok" in err
    X = FinExtMetric.from_json(paths["x"].read_text())
    zeta = Witness.from_json(out.read_text())
    assert check_witness(X, zeta, 0 if exact else 1e-9).ok
    code, text, _ = run("propa", "check", "-X", paths["x"], "-w", out)
    assert code == 0 and text.startswith("ok")
    again = tmp_path / "zeta2.json"
    run("propa", "transport", "-X", paths["x"], "-Y", paths["y"], "-f", paths["map"], "-w", paths["xi"],
        "-o", again, *flags)
    assert again.read_bytes() == out.read_bytes()


def test_propa_check_violation(run, tmp_path):
    x = tmp_path / "x.json"
    w = tmp_path / "w.json"
    x.write_text(FinExtMetric([[0, 1], [1, 0]]).to_json())
    w.write_text(Witness([{0: 1}, {1: 1}], 1, 1, 0).to_json())
    code, out, _ = run("propa", "check", "-X", x, "-w", w)
    assert code == 1 and "variation" in out


def test_propa_rejects_non_contraction(run, tmp_path):
    x = tmp_path / "x.json"
    y = tmp_path / "y.json"
    f = tmp_path / "f.json"
    w = tmp_path / "w.json"
    x.write_text(FinExtMetric([[0, 1], [1, 0]]).to_json())
    y.write_text(FinExtMetric([[0, 2], [2, 0]]).to_json())
    f.write_text("[0, 1]")
    w.write_text(Witness([{0: 1}, {1: 1}], 0, 1, 0).to_json())
    assert run("propa", "transport", "-X", x, "-Y", y, "-f", f, "-w", w)[0] == 65


@pytest.mark.parametrize("name,extra", [("scary", []), ("bs", ["-n", 3]), ("gray", ["--s", "x,x x"]),
                                        ("clifford", [])])
def test_fixture_prints_parseable(run, name, extra):
    code, out, _ = run("fixture", name, *extra)
    assert code == 0
    p = parse(out)
    assert p.relations


def test_fixture_bad_arguments(run):
    assert run("fixture", "gray", "--x", "t")[0] == 64


def test_contraction_from_cli_files_matches_library(tmp_path):
    paths = write_instance(tmp_path, 9)
    X = FinExtMetric.from_json(paths["x"].read_text())
    Y = FinExtMetric.from_json(paths["y"].read_text())
    f = json.loads(paths["map"].read_text())["f"]
    assert analyze_contraction(X, Y, f).k <= 3
