import json
import os

import numpy as np
import pytest

from embcomp.cli import main
from embcomp.codecs import CodecConfig
from embcomp.store import EmbeddingMatrix, read_matrix, write_matrix


def make_experiment(tmp_path, codecs=None, bad_codec=False):
    rng = np.random.default_rng(4)
    docs = rng.standard_normal((40, 6)).astype(np.float32)
    ids = [f"d{i:02d}" for i in range(40)]
    corpus = str(tmp_path / "corpus.cemb")
    write_matrix(EmbeddingMatrix(ids, docs), corpus)
    queries = str(tmp_path / "queries.cemb")
    write_matrix(EmbeddingMatrix(["q0", "q1"], docs[[3, 11]]), queries)
    qrels = str(tmp_path / "qrels.txt")
    with open(qrels, "w") as f:
        f.write("q0 0 d03 2\nq1 0 d11 2\n")
    if codecs is None:
        codecs = [CodecConfig.identity(), CodecConfig.scalar_quant(8, "equal_distance")]
    if bad_codec:
        codecs = codecs + [CodecConfig.pq(2, 8)]  # needs 256 calibration vectors
    config = {
        "corpus_path": corpus,
        "query_path": queries,
        "qrels_path": qrels,
        "output_dir": str(tmp_path / "out"),
        "codecs": [c.to_dict() for c in codecs],
        "ks": [3, 10],
        "batch_size": 16,
    }
    config_path = str(tmp_path / "config.json")
    with open(config_path, "w") as f:
        json.dump(config, f)
    return config_path, str(tmp_path / "out")


def test_synth_writes_readable_file(tmp_path, capsys):
    out = str(tmp_path / "synth.cemb")
    code = main(
        [
            "synth",
            "--out", out,
            "--seed", "7",
            "--dim", "16",
            "--clusters", "4",
            "--spread", "0.05",
            "--count", "200",
        ]
    )
    assert code == 0
    assert "wrote 200 x 16" in capsys.readouterr().out
    matrix = read_matrix(out)
    assert matrix.values.shape == (200, 16)
    assert matrix.ids[0] == "doc0"
    # same seed, same bytes
    out2 = str(tmp_path / "synth2.cemb")
    main(["synth", "--out", out2, "--seed", "7", "--dim", "16",
          "--clusters", "4", "--spread", "0.05", "--count", "200"])
    assert open(out, "rb").read() == open(out2, "rb").read()


def test_run_exit_codes(tmp_path, capsys):
    config_path, out_dir = make_experiment(tmp_path)
    assert main(["run", "--config", config_path]) == 0
    captured = capsys.readouterr()
    assert "2 cells ok, 0 failed" in captured.out
    assert os.path.exists(os.path.join(out_dir, "result_identity_40.json"))
    assert os.path.exists(os.path.join(out_dir, "result_sq8_eq_40.json"))


def test_run_partial_failure_exit_one(tmp_path, capsys):
    config_path, _ = make_experiment(tmp_path, bad_codec=True)
    assert main(["run", "--config", config_path]) == 1
    captured = capsys.readouterr()
    assert "2 cells ok, 1 failed" in captured.out
    assert "FAILED pq2x8 @ 40" in captured.err


def test_run_output_dir_override(tmp_path):
    config_path, _ = make_experiment(tmp_path)
    override = str(tmp_path / "elsewhere")
    assert main(["run", "--config", config_path, "--output-dir", override]) == 0
    assert os.path.exists(os.path.join(override, "result_identity_40.json"))


def test_run_missing_config_exit_two(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2
    assert "error:" in capsys.readouterr().err


def test_report_pareto_scaling_outputs(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    config_path, out_dir = make_experiment(tmp_path)
    main(["run", "--config", config_path])
    capsys.readouterr()

    results_glob = os.path.join(out_dir, "result_*.json")
    base = str(tmp_path / "table")
    assert main(["report", "--results", results_glob, "--metric", "ndcg@10", "--out", base]) == 0
    out = capsys.readouterr().out
    assert "identity" in out and "sq8_eq" in out
    assert os.path.getsize(base + ".csv") > 0
    assert open(base + ".png", "rb").read(8) == b"\x89PNG\r\n\x1a\n"

    base = str(tmp_path / "pareto")
    assert main(
        ["pareto", "--results", results_glob, "--metric", "ndcg@10", "--out", base, "--no-figure"]
    ) == 0
    assert os.path.exists(base + ".csv")
    assert not os.path.exists(base + ".png")

    # scaling over a single corpus size is an input error -> exit 2
    base = str(tmp_path / "scaling")
    assert main(
        ["scaling", "--results", results_glob, "--metric", "ndcg@10", "--out", base]
    ) == 2
    assert ">= 2 corpus sizes" in capsys.readouterr().err


def test_report_empty_glob_exit_two(tmp_path, capsys):
    assert main(
        ["report", "--results", str(tmp_path / "none_*.json"), "--out", str(tmp_path / "t")]
    ) == 2
    assert "no result files" in capsys.readouterr().err


def test_subsample_builds_manifest(tmp_path, capsys):
    run_a = tmp_path / "runA.txt"
    run_b = tmp_path / "runB.txt"
    with open(run_a, "w") as f:
        for rank, doc in enumerate(["rel0", "neg0", "neg1", "neg2"], start=1):
            f.write(f"q0 Q0 {doc} {rank} {1.0/rank:.3f} sysA\n")
    with open(run_b, "w") as f:
        for rank, doc in enumerate(["neg0", "rel0", "neg3", "neg4"], start=1):
            f.write(f"q0 Q0 {doc} {rank} {1.0/rank:.3f} sysB\n")
    qrels = tmp_path / "qrels.txt"
    qrels.write_text("q0 0 rel0 2\nq0 0 neg0 0\n")
    universe = tmp_path / "universe.txt"
    docs = ["rel0", "neg0", "neg1", "neg2", "neg3", "neg4"] + [f"pad{i}" for i in range(20)]
    universe.write_text("\n".join(docs) + "\n")
    out = str(tmp_path / "manifest.json")

    code = main(
        [
            "subsample",
            "--runs", str(run_a), str(run_b),
            "--qrels", str(qrels),
            "--universe", str(universe),
            "--sizes", "10", "20",
            "--out", out,
            "--seed", "5",
            "--drop-fraction", "0.0",
            "--distractors", "3",
        ]
    )
    assert code == 0
    assert "sizes=[10, 20]" in capsys.readouterr().out
    manifest = json.load(open(out))
    assert manifest["sizes"] == [10, 20]
    ten = set(manifest["corpora"]["10"])
    twenty = set(manifest["corpora"]["20"])
    assert "rel0" in ten and "neg0" in ten  # relevant + top distractor always kept
    assert ten <= twenty
    assert len(ten) == 10 and len(twenty) == 20


def test_subsample_shortage_exit_two(tmp_path, capsys):
    run_a = tmp_path / "runA.txt"
    run_a.write_text("q0 Q0 d1 1 0.9 sysA\n")
    qrels = tmp_path / "qrels.txt"
    qrels.write_text("q0 0 d1 0\n")
    universe = tmp_path / "universe.txt"
    universe.write_text("d1\n")
    code = main(
        [
            "subsample",
            "--runs", str(run_a),
            "--qrels", str(qrels),
            "--universe", str(universe),
            "--sizes", "1",
            "--out", str(tmp_path / "m.json"),
            "--distractors", "5",
        ]
    )
    assert code == 2
    assert "only 1 distractor candidates" in capsys.readouterr().err


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        main([])
