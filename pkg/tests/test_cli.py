import json
import hashlib

import pytest

from covertower import RunConfig, store_doc, subgroup_doc, subgroup_from_doc
from covertower.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _run_json(capsys, *argv):
    code, out, err = _run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def _seed_subgroups(ws, index_two_subgroups):
    names = []
    for sub in index_two_subgroups[:2]:
        names.append(store_doc(ws, subgroup_doc(sub)).name)
    return names


def test_enumerate(tmp_path, capsys):
    out = _run_json(
        capsys,
        "--workspace",
        str(tmp_path),
        "enumerate",
        "--genus",
        "2",
        "--max-index",
        "2",
    )
    assert out["counts"] == {"1": 1, "2": 15}
    assert len(out["files"]) == 16
    for name in out["files"]:
        assert (tmp_path / name).is_file()
    assert (tmp_path / "manifest-enumerate-g2-i2.json").is_file()
    assert (tmp_path / "index.json").is_file()


def test_char_core_equals_homology_cover_table(tmp_path, capsys, index_two_subgroups):
    ws = str(tmp_path)
    names = _seed_subgroups(tmp_path, index_two_subgroups)
    core = _run_json(capsys, "--workspace", ws, "char", "core", "--subgroup", names[0])
    hom = _run_json(
        capsys, "--workspace", ws, "char", "homology", "--genus", "2", "--n", "2"
    )
    assert core["index"] == hom["index"] == 16
    assert core["certificate"] == "hom-kernel-intersection"
    assert hom["certificate"] == "homology-level"
    # Different certificates, different files, one underlying cover.
    core_sub = subgroup_from_doc(json.loads((tmp_path / core["file"]).read_text()))
    hom_sub = subgroup_from_doc(json.loads((tmp_path / hom["file"]).read_text()))
    assert core_sub == hom_sub


def test_intersect(tmp_path, capsys, index_two_subgroups):
    ws = str(tmp_path)
    names = _seed_subgroups(tmp_path, index_two_subgroups)
    out = _run_json(capsys, "--workspace", ws, "intersect", names[0], names[1])
    assert out["index"] == 4
    same = _run_json(capsys, "--workspace", ws, "intersect", names[0], names[0])
    assert same["index"] == 2
    assert same["file"] == names[0]


def test_tower_build_export_and_ledger(tmp_path, capsys):
    ws = str(tmp_path)
    built = _run_json(
        capsys,
        "--workspace",
        ws,
        "tower",
        "build",
        "--genus",
        "2",
        "--step",
        "homology:2",
        "--dot",
    )
    assert built["nodes"] == 2 and built["edges"] == 1
    assert (tmp_path / built["dot"]).is_file()

    code, out, err = _run(
        capsys, "--workspace", ws, "export", "--tower", built["file"], "--dot"
    )
    assert code == 0
    assert out == (tmp_path / built["dot"]).read_text()

    doc = _run_json(
        capsys, "--workspace", ws, "export", "--tower", built["file"], "--json"
    )
    assert doc["schema"] == "tower/1"

    report = _run_json(
        capsys,
        "--workspace",
        ws,
        "ledger",
        "check",
        "--tower",
        built["file"],
        "--m-range=-3..4",
    )
    assert report["schema"] == "ledger/1"
    assert all(check["pass"] for check in report["checks"])
    deep = next(s for s in report["perStratum"] if s["degree"] == 16)
    assert deep["exponents"]["2"] == {"num": 13, "den": 16}


def test_vaut_verbs(tmp_path, capsys, index_two_subgroups):
    ws = str(tmp_path)
    names = _seed_subgroups(tmp_path, index_two_subgroups)
    ident = _run_json(
        capsys, "--workspace", ws, "vaut", "identity", "--subgroup", names[0]
    )
    assert ident["domainIndex"] == 2

    composed = _run_json(
        capsys, "--workspace", ws, "vaut", "compose", ident["file"], ident["file"]
    )
    assert composed["file"] == ident["file"]

    inverted = _run_json(capsys, "--workspace", ws, "vaut", "invert", ident["file"])
    assert inverted["file"] == ident["file"]

    eq = _run_json(
        capsys, "--workspace", ws, "vaut", "germ-eq", ident["file"], ident["file"]
    )
    assert eq == {"germEqual": True}

    found = _run_json(
        capsys, "--workspace", ws, "vaut", "mcl-search", ident["file"], "--depth", "2"
    )
    assert found["found"] is True
    assert found["index"] <= 2


def test_vaut_reduce_orders_match(tmp_path, capsys, pres2, index_two_subgroups):
    from covertower import full_subgroup, intersect

    ws = str(tmp_path)
    h1, h2 = index_two_subgroups[:2]
    full = store_doc(tmp_path, subgroup_doc(full_subgroup(pres2))).name
    a = store_doc(tmp_path, subgroup_doc(h1)).name
    c = store_doc(tmp_path, subgroup_doc(intersect(h1, h2))).name
    b = store_doc(tmp_path, subgroup_doc(h2)).name
    left = _run_json(
        capsys, "--workspace", ws, "vaut", "reduce", full, a, c, b, full,
        "--order", "left",
    )
    right = _run_json(
        capsys, "--workspace", ws, "vaut", "reduce", full, a, c, b, full,
        "--order", "right",
    )
    assert left == right
    assert left["domainIndex"] == 4


def test_genus1_verbs(tmp_path, capsys):
    ws = str(tmp_path)
    moduli = _run_json(
        capsys, "--workspace", ws, "genus1", "modulus-map", "--lattice", "0,1,2,0"
    )
    assert moduli["lattice"] == [[2, 0], [0, 1]]
    assert moduli["matrix"][0][0] == {"num": 2, "den": 1}

    acted = _run_json(
        capsys,
        "--workspace",
        ws,
        "genus1",
        "act",
        "--matrix",
        "2,1,0,1",
        "--point",
        "0,1",
    )
    assert acted["image"] == {
        "real": {"num": 1, "den": 1},
        "imag": {"num": 2, "den": 1},
    }

    orbit = _run_json(
        capsys,
        "--workspace",
        ws,
        "genus1",
        "orbit",
        "--target",
        "1+2i",
        "--eps",
        "1/1000",
    )
    assert orbit["matrix"] == [
        [{"num": 2, "den": 1}, {"num": 1, "den": 1}],
        [{"num": 0, "den": 1}, {"num": 1, "den": 1}],
    ]
    assert orbit["errorSquared"] == {"num": 0, "den": 1}


def test_usage_errors_exit_two(tmp_path, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--workspace", str(tmp_path), "no-such-verb"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit) as excinfo:
        main(["--workspace", str(tmp_path), "genus1", "act", "--matrix", "1,2,3"])
    assert excinfo.value.code == 2


def test_budget_exit_three(tmp_path, capsys):
    cfg_path = tmp_path / "tiny.json"
    cfg_path.write_text(json.dumps(RunConfig(max_search_nodes=10).to_json()))
    code, out, err = _run(
        capsys,
        "--workspace",
        str(tmp_path),
        "--config",
        str(cfg_path),
        "enumerate",
        "--genus",
        "2",
        "--max-index",
        "3",
    )
    assert code == 3
    assert json.loads(err)["error"] == "BudgetExceeded"


def test_math_error_exit_four(tmp_path, capsys):
    code, out, err = _run(
        capsys,
        "--workspace",
        str(tmp_path),
        "genus1",
        "modulus-map",
        "--lattice",
        "1,2,2,4",
    )
    assert code == 4
    assert json.loads(err)["error"] == "SingularMatrix"


def test_overflow_exit_five(tmp_path, capsys, index_two_subgroups):
    names = _seed_subgroups(tmp_path, index_two_subgroups)
    cfg_path = tmp_path / "tiny.json"
    cfg_path.write_text(json.dumps(RunConfig(max_result_index=3).to_json()))
    code, out, err = _run(
        capsys,
        "--workspace",
        str(tmp_path),
        "--config",
        str(cfg_path),
        "intersect",
        names[0],
        names[1],
    )
    assert code == 5
    assert json.loads(err)["error"] == "IntersectionIndexOverflow"


def test_schema_error_exit_six(tmp_path, capsys):
    code, out, err = _run(
        capsys,
        "--workspace",
        str(tmp_path),
        "char",
        "core",
        "--subgroup",
        "missing.json",
    )
    assert code == 6
    assert json.loads(err)["error"] == "SchemaError"


def _digest_tree(root):
    digests = {}
    for path in sorted(root.iterdir()):
        digests[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return digests


def test_byte_identical_reruns(tmp_path, capsys):
    transcripts = []
    trees = []
    for label in ("a", "b"):
        ws = tmp_path / label
        ws.mkdir()
        lines = []
        for argv in (
            ["enumerate", "--genus", "2", "--max-index", "2"],
            ["char", "homology", "--genus", "2", "--n", "2"],
            ["tower", "build", "--genus", "2", "--step", "homology:2", "--dot"],
        ):
            code, out, err = _run(capsys, "--workspace", str(ws), *argv)
            assert code == 0
            lines.append(out)
        transcripts.append("".join(lines))
        trees.append(_digest_tree(ws))
    assert transcripts[0] == transcripts[1]
    assert trees[0] == trees[1]
