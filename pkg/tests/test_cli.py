import io

import pytest

from irfkit import cli


@pytest.fixture
def indexed(tmp_path, toy_paths):
    index_dir = tmp_path / "index"
    rc = cli.main(
        [
            "index",
            "--corpus", str(toy_paths["corpus"]),
            "--format", "trectext",
            "--output", str(index_dir),
        ]
    )
    assert rc == 0
    return index_dir


def run_args(indexed, toy_paths, tmp_path, model="rm3", k="1", n="3", extra=()):
    return [
        "run",
        "--index", str(indexed),
        "--topics", str(toy_paths["topics"]),
        "--qrels", str(toy_paths["qrels"]),
        "--model", model,
        "--docs-per-iter", k,
        "--iterations", n,
        "--set", "mu=1.0",
        "--set", "interp_lambda=0.5",
        "--output", str(tmp_path / "run.txt"),
        *extra,
    ]


class TestIndexCommand:
    def test_bundled_fixture_stats(self, tmp_path, toy_paths, capsys):
        rc = cli.main(
            [
                "index",
                "--corpus", str(toy_paths["corpus"]),
                "--output", str(tmp_path / "index"),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "documents      6" in out
        assert "vocabulary     4" in out

    def test_bad_format_flag_exits_2(self, tmp_path, toy_paths, capsys):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(
                [
                    "index",
                    "--corpus", str(toy_paths["corpus"]),
                    "--format", "docx",
                    "--output", str(tmp_path / "x"),
                ]
            )
        assert excinfo.value.code == 2

    def test_missing_corpus_is_data_error(self, tmp_path, capsys):
        rc = cli.main(
            ["index", "--corpus", str(tmp_path / "none"), "--output", str(tmp_path / "x")]
        )
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestRunCommand:
    def test_writes_run_log_and_config_echo(self, indexed, toy_paths, tmp_path, capsys):
        rc = cli.main(run_args(indexed, toy_paths, tmp_path))
        assert rc == 0
        run_file = tmp_path / "run.txt"
        assert run_file.exists()
        assert (tmp_path / "run.txt.sessions.jsonl").exists()
        echo = (tmp_path / "run.txt.config").read_text()
        assert "model=rm3" in echo and "mu=1.0" in echo

    def test_run_file_matches_oracle_trace(self, indexed, toy_paths, tmp_path):
        cli.main(run_args(indexed, toy_paths, tmp_path))
        docs = [line.split()[2] for line in (tmp_path / "run.txt").read_text().splitlines()]
        assert docs == ["d1", "d3", "d2", "d5", "d4"]

    def test_ten_iteration_budget_runs_until_candidates_exhausted(
        self, indexed, toy_paths, tmp_path
    ):
        rc = cli.main(run_args(indexed, toy_paths, tmp_path, k="1", n="10"))
        assert rc == 0
        lines = (tmp_path / "run.txt.sessions.jsonl").read_text().splitlines()
        # feedback expansion eventually reaches every toy doc, after which
        # the session runs out of unshown candidates and stops early
        assert 1 <= len(lines) <= 10
        docs = [line.split()[2] for line in (tmp_path / "run.txt").read_text().splitlines()]
        assert len(docs) == len(set(docs)) == 6

    def test_unknown_model_exits_2(self, indexed, toy_paths, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(run_args(indexed, toy_paths, tmp_path, model="splade"))
        assert excinfo.value.code == 2

    def test_rerun_is_byte_identical(self, indexed, toy_paths, tmp_path):
        cli.main(run_args(indexed, toy_paths, tmp_path))
        first = (tmp_path / "run.txt").read_bytes()
        first_echo = (tmp_path / "run.txt.config").read_bytes()
        cli.main(run_args(indexed, toy_paths, tmp_path))
        assert (tmp_path / "run.txt").read_bytes() == first
        assert (tmp_path / "run.txt.config").read_bytes() == first_echo

    def test_threads_flag_gives_same_output(self, indexed, toy_paths, tmp_path):
        cli.main(run_args(indexed, toy_paths, tmp_path))
        single = (tmp_path / "run.txt").read_bytes()
        cli.main(run_args(indexed, toy_paths, tmp_path, extra=("--threads", "4")))
        assert (tmp_path / "run.txt").read_bytes() == single

    def test_unknown_param_in_file_is_data_error(self, indexed, toy_paths, tmp_path, capsys):
        params = tmp_path / "params.txt"
        params.write_text("mu=1.0\nwarp=9\n")
        args = run_args(indexed, toy_paths, tmp_path, extra=("--params", str(params)))
        rc = cli.main(args)
        assert rc == 1
        assert "warp" in capsys.readouterr().err

    def test_qrels_required_without_interactive(self, indexed, toy_paths, tmp_path, capsys):
        args = run_args(indexed, toy_paths, tmp_path)
        idx = args.index("--qrels")
        del args[idx : idx + 2]
        rc = cli.main(args)
        assert rc == 2

    def test_interactive_matches_replayed_simulated_judge(
        self, indexed, toy_paths, tmp_path, monkeypatch
    ):
        # simulated run first
        cli.main(run_args(indexed, toy_paths, tmp_path))
        simulated = (tmp_path / "run.txt").read_bytes()
        # the oracle trace judges d1 yes, d3 yes, d2 no
        monkeypatch.setattr("sys.stdin", io.StringIO("y\ny\nn\n"))
        args = run_args(indexed, toy_paths, tmp_path, extra=("--interactive",))
        idx = args.index("--qrels")
        del args[idx : idx + 2]
        args[args.index(str(tmp_path / "run.txt"))] = str(tmp_path / "run2.txt")
        rc = cli.main(args)
        assert rc == 0
        assert (tmp_path / "run2.txt").read_bytes() == simulated


class TestEvalCommand:
    def test_perfect_run_scores_map_one(self, tmp_path, toy_paths, capsys):
        run_file = tmp_path / "perfect.txt"
        lines = [
            f"q1 Q0 {doc} {rank} {10.0 - rank:.6f} tag"
            for rank, doc in enumerate(["d1", "d3", "d5", "d2", "d4", "d6"], 1)
        ]
        run_file.write_text("\n".join(lines) + "\n")
        rc = cli.main(
            ["eval", "--run", str(run_file), "--qrels", str(toy_paths["qrels"]), "--metric", "map"]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "all\tmap\t1.0000" in out

    def test_report_file_written(self, tmp_path, toy_paths):
        run_file = tmp_path / "r.txt"
        run_file.write_text("q1 Q0 d1 1 1.000000 tag\n")
        report = tmp_path / "report.tsv"
        rc = cli.main(
            [
                "eval",
                "--run", str(run_file),
                "--qrels", str(toy_paths["qrels"]),
                "--output", str(report),
            ]
        )
        assert rc == 0
        text = report.read_text()
        assert "q1\tmap\t" in text and "q1\tndcg20\t" in text

    def test_malformed_run_is_data_error(self, tmp_path, toy_paths, capsys):
        run_file = tmp_path / "bad.txt"
        run_file.write_text("q1 d1 1\n")
        rc = cli.main(["eval", "--run", str(run_file), "--qrels", str(toy_paths["qrels"])])
        assert rc == 1


class TestCompareCommand:
    def test_run_against_itself_not_significant(self, indexed, toy_paths, tmp_path, capsys):
        cli.main(run_args(indexed, toy_paths, tmp_path))
        capsys.readouterr()
        rc = cli.main(
            [
                "compare",
                "--run-a", str(tmp_path / "run.txt"),
                "--run-b", str(tmp_path / "run.txt"),
                "--qrels", str(toy_paths["qrels"]),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "p=1.0000: not significant" in out

    def test_mismatched_query_sets_exit_1(self, tmp_path, capsys):
        (tmp_path / "a.txt").write_text("q1 Q0 d1 1 1.000000 t\n")
        (tmp_path / "b.txt").write_text("q2 Q0 d9 1 1.000000 t\n")
        (tmp_path / "q.txt").write_text("q1 0 d1 1\nq2 0 d9 1\n")
        rc = cli.main(
            [
                "compare",
                "--run-a", str(tmp_path / "a.txt"),
                "--run-b", str(tmp_path / "b.txt"),
                "--qrels", str(tmp_path / "q.txt"),
            ]
        )
        assert rc == 1
        assert "query sets differ" in capsys.readouterr().err


class TestSweepCommand:
    def test_singleton_grid_matches_eval(self, indexed, toy_paths, tmp_path, capsys):
        cli.main(run_args(indexed, toy_paths, tmp_path))
        capsys.readouterr()
        rc = cli.main(
            [
                "eval",
                "--run", str(tmp_path / "run.txt"),
                "--qrels", str(toy_paths["qrels"]),
                "--metric", "map",
            ]
        )
        assert rc == 0
        eval_out = capsys.readouterr().out
        map_value = [l for l in eval_out.splitlines() if l.startswith("all")][0].split("\t")[2]

        grid = tmp_path / "grid.txt"
        grid.write_text(
            "mu=1.0\ninterp_lambda=0.5\nnum_expansion_terms=20\n"
        )
        rc = cli.main(
            [
                "sweep",
                "--index", str(indexed),
                "--topics", str(toy_paths["topics"]),
                "--qrels", str(toy_paths["qrels"]),
                "--model", "rm3",
                "--docs-per-iter", "1",
                "--iterations", "3",
                "--grid", str(grid),
                "--folds", "1",
            ]
        )
        assert rc == 0
        sweep_out = capsys.readouterr().out
        pooled = [l for l in sweep_out.splitlines() if l.startswith("pooled")][0]
        assert pooled.split("\t")[4] == map_value

    def test_unknown_grid_key_is_data_error(self, indexed, toy_paths, tmp_path, capsys):
        grid = tmp_path / "grid.txt"
        grid.write_text("warpfactor=2\n")
        rc = cli.main(
            [
                "sweep",
                "--index", str(indexed),
                "--topics", str(toy_paths["topics"]),
                "--qrels", str(toy_paths["qrels"]),
                "--model", "rm3",
                "--docs-per-iter", "1",
                "--iterations", "1",
                "--grid", str(grid),
            ]
        )
        assert rc == 1
        assert "warpfactor" in capsys.readouterr().err

    def test_too_few_topics_for_folds_is_data_error(self, indexed, toy_paths, tmp_path, capsys):
        rc = cli.main(
            [
                "sweep",
                "--index", str(indexed),
                "--topics", str(toy_paths["topics"]),
                "--qrels", str(toy_paths["qrels"]),
                "--model", "rm3",
                "--docs-per-iter", "1",
                "--iterations", "1",
                "--folds", "5",
            ]
        )
        assert rc == 1
