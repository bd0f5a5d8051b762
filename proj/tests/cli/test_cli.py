"""End-to-end checks of the satkit command-line tool."""

import csv
import filecmp
import sys
import json
import os
import subprocess
import tempfile
import unittest
from pathlib import Path

BIN = os.environ["SATKIT_BIN"]
TOOLS = Path(__file__).resolve().parents[2] / "tools"
DOCS = Path(os.environ["SATKIT_DOCS"])
GOLDEN = DOCS / "golden"


def run(*args, expect=0):
    proc = subprocess.run([BIN, *args], capture_output=True, text=True)
    if proc.returncode != expect:
        raise AssertionError(
            f"{args}: exit {proc.returncode}, expected {expect}\n{proc.stdout}\n{proc.stderr}"
        )
    return proc


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2))
    return str(path)


def scene_with(persons, width=644, height=364):
    return {
        "schema_version": 1,
        "image": {"width": width, "height": height},
        "image_hr": {"width": 2 * width, "height": 2 * height},
        "patch_size": 14,
        "fov_deg": 60.0,
        "persons": persons,
    }


class CliTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def example_args(self, out):
        return [
            "--scene", str(DOCS / "example_scene.json"),
            "--config", str(DOCS / "example_config.json"),
            "--out", str(out),
        ]

    def test_golden_files_reproduce(self):
        out = self.tmp / "ex"
        run("scale-map", *self.example_args(out))
        run("tokenize", *self.example_args(out))
        run("cost", *self.example_args(out))
        for golden in sorted(GOLDEN.iterdir()):
            produced = out / golden.name
            self.assertTrue(produced.exists(), golden.name)
            self.assertTrue(filecmp.cmp(golden, produced, shallow=False), golden.name)

    def test_outputs_are_byte_identical_across_runs(self):
        a, b = self.tmp / "a", self.tmp / "b"
        for out in (a, b):
            run("tokenize", *self.example_args(out))
            run("forward", *self.example_args(out), "--seed", "3")
        for name in ("token_layout.json", "tokens.ppm", "predictions.json", "scale_map_pred.json", "loss.json"):
            if (a / name).exists():
                self.assertTrue(filecmp.cmp(a / name, b / name, shallow=False), name)
        self.assertTrue((a / "predictions.json").exists())

    def test_seed_changes_forward_outputs(self):
        a, b = self.tmp / "a", self.tmp / "b"
        run("forward", *self.example_args(a), "--seed", "1")
        run("forward", *self.example_args(b), "--seed", "2")
        self.assertNotEqual((a / "predictions.json").read_text(), (b / "predictions.json").read_text())
        preds = json.loads((a / "predictions.json").read_text())
        self.assertEqual(len(preds["predictions"]), 8)

    def test_all_large_scene_has_baseline_token_count(self):
        scene = write_json(self.tmp / "large.json", scene_with([{"bbox": [0, 0, 1288, 728], "depth": 3.0}]))
        run("tokenize", "--scene", scene, "--out", str(self.tmp / "o"))
        counts = json.loads((self.tmp / "o" / "token_counts.json").read_text())
        self.assertEqual(counts["k_sa"], 1196)
        self.assertEqual(counts["k_large"], 1196)

    def test_empty_scene(self):
        scene = write_json(self.tmp / "empty.json", scene_with([]))
        out = self.tmp / "o"
        run("tokenize", "--scene", scene, "--out", str(out))
        run("scale-map", "--scene", scene, "--out", str(out))
        counts = json.loads((out / "token_counts.json").read_text())
        self.assertEqual(counts["k_sa"], counts["k_lr"] // 4)
        data = (out / "scale_map_gt.ppm").read_bytes()
        header = b"P6\n1288 728\n255\n"
        self.assertTrue(data.startswith(header))
        self.assertEqual(set(data[len(header):]), {255})

    def test_cost_sweep_over_three_scenes(self):
        synth = self.tmp / "synth"
        run("synth", "--count", "3", "--seed", "11", "--out", str(synth))
        scenes = sorted(str(p) for p in synth.glob("*.json"))
        self.assertEqual(len(scenes), 3)
        args = []
        for s in scenes:
            args += ["--scene", s]
        run("cost", *args, "--out", str(self.tmp / "cost"))
        with open(self.tmp / "cost" / "cost.csv") as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(len(rows), 9)
        by_scene = {}
        for r in rows:
            by_scene.setdefault(r["scene"], {})[r["scheme"]] = r
        for scene, schemes in by_scene.items():
            self.assertEqual(set(schemes), {"uniform_lr", "uniform_hr", "scale_adaptive"})
            if int(schemes["scale_adaptive"]["k_b"]) >= 1:
                self.assertGreater(float(schemes["uniform_hr"]["macs"]), float(schemes["scale_adaptive"]["macs"]))
            self.assertGreater(float(schemes["scale_adaptive"]["macs"]), 0.0)

    def test_eval_of_ground_truth_is_perfect(self):
        persons, preds = [], []
        for i, (x, z) in enumerate([(-1.0, 4.0), (0.8, 6.0), (0.0, 9.0)]):
            pose = [[0.0, 0.0, 0.0] for _ in range(24)]
            pose[0] = [0.0, 0.3 * i, 0.0]
            pose[5] = [0.2, 0.0, 0.1]
            betas = [0.1 * (k - 5) for k in range(10)]
            trans = [x, 0.0, z]
            persons.append({"bbox": [100.0 + 300 * i, 100.0, 300.0 + 300 * i, 600.0], "depth": z,
                            "pose": pose, "betas": betas, "trans": trans})
            preds.append({"pose": pose, "betas": betas, "trans": trans, "box": [0.3, 0.5, 0.1, 0.6],
                          "confidence": 1.0})
        scene = write_json(self.tmp / "gt.json", scene_with(persons))
        pred = write_json(self.tmp / "pred.json", {"schema_version": 1, "scene": "gt", "predictions": preds,
                                                   "valid": [0, 1, 2]})
        run("eval", "--scene", scene, "--pred", pred, "--out", str(self.tmp / "e"))
        report = json.loads((self.tmp / "e" / "eval_report.json").read_text())
        self.assertEqual(report["detection"]["f1"], 1.0)
        for key in ("mve_mm", "mpjpe_mm", "nmve_mm", "nmje_mm"):
            self.assertLessEqual(report[key], 1e-6)
        self.assertLessEqual(report["pa_mpjpe_mm"], 1e-3)
        self.assertEqual(report["pck"], 1.0)
        self.assertTrue((self.tmp / "e" / "eval_report.txt").exists())

    def test_exit_codes(self):
        out = str(self.tmp / "o")
        run("tokenize", "--scene", str(self.tmp / "missing.json"), "--out", out, expect=5)
        bad = self.tmp / "bad.json"
        bad.write_text('{\n  "schema_version": 1,\n  "image": {\n}')
        proc = run("tokenize", "--scene", str(bad), "--out", out, expect=2)
        self.assertIn("bad.json:4:", proc.stderr)
        unknown = scene_with([])
        unknown["colour"] = 1
        proc = run("tokenize", "--scene", write_json(self.tmp / "u.json", unknown), "--out", out, expect=3)
        self.assertIn("colour", proc.stderr)
        hr = scene_with([])
        hr["image_hr"]["width"] = 5
        run("tokenize", "--scene", write_json(self.tmp / "hr.json", hr), "--out", out, expect=3)
        run("frobnicate", expect=64)
        run("eval", "--scene", str(DOCS / "example_scene.json"), expect=64)

    def test_gt_scale_map_mode(self):
        out = self.tmp / "g"
        run("forward", *self.example_args(out), "--gt-scale-map")
        layout_counts = json.loads((out / "token_counts.json").read_text())
        golden = json.loads((GOLDEN / "token_counts.json").read_text())
        self.assertEqual(layout_counts, golden)

    def test_converted_body_model_drives_evaluation(self):
        import numpy as np

        rng = np.random.default_rng(0)
        joints = np.array([[0, 0, 0], [0.2, -0.3, 0.05], [-0.2, -0.3, 0.0], [0.0, 0.4, -0.05]])
        verts = np.repeat(joints, 3, axis=0) + rng.normal(0, 0.02, size=(12, 3))
        weights = np.zeros((12, 4))
        weights[np.arange(12), np.arange(12) // 3] = 1.0
        regressor = np.zeros((4, 12))
        regressor[np.arange(12) // 3, np.arange(12)] = 1.0 / 3.0
        np.savez(self.tmp / "model.npz", v_template=verts, shapedirs=rng.normal(0, 0.01, size=(12, 3, 10)),
                 kintree_table=np.array([[4294967295, 0, 0, 0], [0, 1, 2, 3]]), J_regressor=regressor,
                 weights=weights, f=np.array([[0, 1, 2]]))
        subprocess.run([sys.executable, str(TOOLS / "convert_smpl.py"), str(self.tmp / "model.npz"),
                        str(self.tmp / "model.json")], check=True)
        config = write_json(self.tmp / "cfg.json", {"schema_version": 1, "body_model": str(self.tmp / "model.json")})
        pose = [[0.0, 0.1, 0.0], [0.3, 0.0, 0.0], [0.0, 0.0, -0.2], [0.1, 0.1, 0.1]]
        person = {"bbox": [500.0, 200.0, 800.0, 600.0], "depth": 5.0, "pose": pose, "betas": [0.5] * 10,
                  "trans": [0.0, 0.0, 5.0]}
        scene = write_json(self.tmp / "s.json", scene_with([person]))
        pred = write_json(self.tmp / "p.json", {
            "schema_version": 1, "scene": "s", "valid": [0],
            "predictions": [{"pose": pose, "betas": [0.5] * 10, "trans": [0.0, 0.0, 5.0],
                             "box": [0.5, 0.5, 0.2, 0.5], "confidence": 0.9}]})
        run("eval", "--scene", scene, "--pred", pred, "--config", config, "--out", str(self.tmp / "e"))
        report = json.loads((self.tmp / "e" / "eval_report.json").read_text())
        self.assertEqual(report["detection"]["f1"], 1.0)
        self.assertLessEqual(report["mpjpe_mm"], 1e-6)

    def test_image_converter_produces_a_loadable_scene(self):
        from PIL import Image

        Image.new("RGB", (57, 31), (10, 200, 30)).save(self.tmp / "img.png")
        write_json(self.tmp / "ann.json", {"name": "photo", "persons": [{"bbox": [3.0, 4.0, 30.0, 28.0], "depth": 2.0}]})
        subprocess.run([sys.executable, str(TOOLS / "image_to_scene.py"), str(self.tmp / "img.png"),
                        str(self.tmp / "ann.json"), str(self.tmp / "scene.json")], check=True)
        scene = json.loads((self.tmp / "scene.json").read_text())
        self.assertEqual(scene["image_hr"], {"width": 56, "height": 30})
        self.assertEqual(scene["pixels"]["data"][:3], [10, 200, 30])
        run("tokenize", "--scene", str(self.tmp / "scene.json"), "--out", str(self.tmp / "t"))
        self.assertTrue((self.tmp / "t" / "tokens.ppm").exists())


if __name__ == "__main__":
    unittest.main(verbosity=2)
