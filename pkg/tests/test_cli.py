import json
import shutil
import subprocess

import pytest

from marginnet.cli import main

TINY_BLOBS = """
dataset = blobs
blobs_train_n = 60
blobs_test_n = 30
blobs_classes = 2
standardize = true
hidden_dims = 8
head = l2svm
svm_c = 0.1
epochs = 5
batch_size = 20
lr_start = 0.02
seed = 1
"""


def write_cfg(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.fixture
def trained_model(tmp_path):
    cfg = write_cfg(tmp_path, "train.cfg",
                    TINY_BLOBS + f"out_dir = {tmp_path}/src\n")
    assert main(["train", "--config", cfg]) == 0
    return f"{tmp_path}/src/model"


class TestTrain:
    def test_writes_artifacts_and_reports_final_row(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "t.cfg",
                        TINY_BLOBS + f"out_dir = {tmp_path}/run\n")
        rc = main(["train", "--config", cfg])
        out = capsys.readouterr().out
        assert rc == 0
        assert "epoch=5" in out
        assert "wrote" in out
        assert (tmp_path / "run" / "metrics.csv").exists()
        assert (tmp_path / "run" / "model" / "manifest.json").exists()

    def test_flag_overrides_are_tagged_cli(self, tmp_path):
        cfg = write_cfg(tmp_path, "t.cfg",
                        TINY_BLOBS + f"out_dir = {tmp_path}/a\n")
        rc = main(["train", "--config", cfg, "--seed", "7",
                   "--out-dir", str(tmp_path / "b")])
        assert rc == 0
        with open(tmp_path / "b" / "runmeta.json") as f:
            echo = json.load(f)["config"]
        assert echo["seed"] == {
            "value": 7, "source": "cli", "default_origin": "artifact",
        }
        assert echo["out_dir"]["source"] == "cli"

    def test_config_errors_exit_2_with_message(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "bad.cfg", "epochz = 3\n")
        assert main(["train", "--config", cfg]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, tmp_path, capsys):
        assert main(["train", "--config", str(tmp_path / "no.cfg")]) == 2
        assert "error:" in capsys.readouterr().err


class TestEval:
    def test_writes_eval_json(self, tmp_path, trained_model, capsys):
        cfg = write_cfg(
            tmp_path, "eval.cfg",
            TINY_BLOBS + f"model = {trained_model}\n"
            f"out_dir = {tmp_path}/eval\n",
        )
        rc = main(["eval", "--config", cfg])
        assert rc == 0
        with open(tmp_path / "eval" / "eval.json") as f:
            report = json.load(f)
        assert report["split"] == "test"
        assert report["head"] == "l2svm"
        assert {"error_pct", "avg_xent", "hinge_sum", "hinge_sq_sum"} <= set(
            report
        )
        out = capsys.readouterr().out
        assert "error_pct=" in out

    def test_eval_needs_a_model(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "eval.cfg",
                        TINY_BLOBS + f"out_dir = {tmp_path}/eval\n")
        assert main(["eval", "--config", cfg]) == 2
        assert "model" in capsys.readouterr().err


class TestGradcheck:
    def test_reports_all_checks(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "gc.cfg", "hidden_dims = 8, 8\n")
        rc = main(["gradcheck", "--config", cfg])
        out = capsys.readouterr().out
        assert rc == 0
        assert "30/30 gradient checks passed" in out
        assert "l2svm.d_w" in out


class TestWarmstart:
    def test_swaps_objective_over_saved_stack(self, tmp_path, trained_model,
                                              capsys):
        cfg = write_cfg(
            tmp_path, "warm.cfg",
            TINY_BLOBS.replace("head = l2svm", "head = softmax")
            + f"source_model = {trained_model}\n"
            f"out_dir = {tmp_path}/warm\n",
        )
        rc = main(["warmstart", "--config", cfg])
        assert rc == 0
        with open(tmp_path / "warm" / "runmeta.json") as f:
            meta = json.load(f)
        assert meta["warm_start"]["source_head"] == "l2svm"
        assert meta["head"]["kind"] == "softmax"

    def test_needs_source_model(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "warm.cfg",
                        TINY_BLOBS + f"out_dir = {tmp_path}/warm\n")
        assert main(["warmstart", "--config", cfg]) == 2
        assert "source_model" in capsys.readouterr().err


class TestEnsemble:
    def test_averages_members_and_writes_report(self, tmp_path, capsys):
        model_dirs = []
        for seed in (1, 2):
            cfg = write_cfg(
                tmp_path, f"m{seed}.cfg",
                TINY_BLOBS.replace("seed = 1", f"seed = {seed}")
                + f"out_dir = {tmp_path}/m{seed}\n",
            )
            assert main(["train", "--config", cfg]) == 0
            model_dirs.append(f"{tmp_path}/m{seed}/model")
        cfg = write_cfg(
            tmp_path, "ens.cfg",
            TINY_BLOBS + f"models = {model_dirs[0]}, {model_dirs[1]}\n"
            f"out_dir = {tmp_path}/ens\n",
        )
        rc = main(["ensemble", "--config", cfg])
        out = capsys.readouterr().out
        assert rc == 0
        with open(tmp_path / "ens" / "ensemble.json") as f:
            report = json.load(f)
        assert len(report["models"]) == 2
        assert len(report["member_error_pct"]) == 2
        assert "ensemble_error_pct" in report
        assert "member" in out

    def test_needs_member_list(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "ens.cfg",
                        TINY_BLOBS + f"out_dir = {tmp_path}/ens\n")
        assert main(["ensemble", "--config", cfg]) == 2
        assert "models" in capsys.readouterr().err


@pytest.mark.skipif(shutil.which("marginnet") is None,
                    reason="console script not on PATH")
def test_console_script_wiring(tmp_path):
    cfg = write_cfg(tmp_path, "t.cfg",
                    TINY_BLOBS + f"out_dir = {tmp_path}/cli\n")
    proc = subprocess.run(
        ["marginnet", "train", "--config", cfg],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert "wrote" in proc.stdout
