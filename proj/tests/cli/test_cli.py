"""End-to-end checks of the xlb command line against the published schemas.

Usage: test_cli.py XLB_BINARY MAKE_FIXTURE_UNIVERSE SCHEMA_DIR
"""

import json
import os
import shutil
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

XLB = MAKE_UNIVERSE = SCHEMAS = None


def load_schemas():
    registry = Registry()
    by_name = {}
    for path in Path(SCHEMAS).glob("*.schema.json"):
        doc = json.loads(path.read_text())
        registry = registry.with_resource(doc["$id"], Resource.from_contents(doc))
        by_name[path.name.removesuffix(".schema.json")] = doc
    return registry, by_name


def run(*args, env=None, check=True):
    e = dict(os.environ)
    e.pop("XLB_GITHUB_TOKEN", None)
    e.update(env or {})
    p = subprocess.run([XLB, "-q", *map(str, args)], capture_output=True, text=True, env=e)
    if check and p.returncode != 0:
        raise AssertionError(f"xlb {' '.join(map(str, args))} -> {p.returncode}\n{p.stderr}")
    return p


def jsonl(path):
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.registry, cls.schemas = load_schemas()
        cls.tmp = Path(tempfile.mkdtemp(prefix="xlb_cli_"))
        cls.universe = cls.tmp / "universe"
        subprocess.run([MAKE_UNIVERSE, cls.universe], check=True, capture_output=True)
        cls.pairs = cls.tmp / "pairs.jsonl"
        run("mine", "--offline-fixture", cls.universe, "--state-dir", cls.tmp / "state", "-o", cls.pairs)

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp, ignore_errors=True)

    def validate(self, instance, name):
        jsonschema.Draft202012Validator(self.schemas[name], registry=self.registry).validate(instance)

    def manifest(self, data_path):
        m = json.loads(Path(str(data_path) + ".manifest.json").read_text())
        self.validate(m, "manifest")
        return m

    def test_scan_report(self):
        proj = self.tmp / "scanproj"
        proj.mkdir()
        (proj / "a.py").write_text('import ctypes\nlib = ctypes.CDLL("x")\nr = lib.f()\ns = r + 1\n')
        (proj / "B.java").write_text("public class B { void f() { int x = 1; } }\n")
        report = json.loads(run("scan", proj).stdout)
        self.validate(report, "scan_report")
        self.assertEqual(report["summary"]["sites"], 2)
        self.assertEqual(run("scan", proj, "--fail-on-found", check=False).returncode, 3)
        self.assertEqual(run("scan", proj / "B.java", "--fail-on-found").returncode, 0)
        only = json.loads(run("scan", proj, "--mechanisms", "jni").stdout)
        self.assertEqual(only["summary"]["sites"], 0)

    def test_scan_empty_and_missing(self):
        empty = self.tmp / "empty"
        empty.mkdir()
        report = json.loads(run("scan", empty).stdout)
        self.validate(report, "scan_report")
        self.assertEqual(report["summary"]["files"], 0)
        self.assertEqual(run("scan", self.tmp / "nope", check=False).returncode, 2)

    def test_config_and_flag_precedence(self):
        proj = self.tmp / "cfgproj"
        proj.mkdir()
        (proj / "a.py").write_text('import ctypes\nlib = ctypes.CDLL("x")\nr = lib.f()\n')
        cfg = self.tmp / "scan.json"
        cfg.write_text(json.dumps({"mechanisms": ["jni"], "max_transfers": 2}))
        report = json.loads(run("scan", proj, "--config", cfg).stdout)
        self.assertEqual((report["mechanisms"], report["max_transfers"]), (["jni"], 2))
        report = json.loads(run("scan", proj, "--config", cfg, "--mechanisms", "ctypes").stdout)
        self.assertEqual(report["mechanisms"], ["ctypes"])
        cfg.write_text(json.dumps({"max_transfers": "three"}))
        self.assertEqual(run("scan", proj, "--config", cfg, check=False).returncode, 2)

    def test_mine_outputs(self):
        pairs = jsonl(self.pairs)
        self.assertEqual(len(pairs), 3)
        for p in pairs:
            self.validate(p, "function_pair")
        m = self.manifest(self.pairs)
        self.validate(m["criteria"], "criteria")
        self.assertEqual(m["pair_count"], 3)
        for line in jsonl(self.tmp / "state" / "checkpoint.jsonl"):
            self.validate(line, "checkpoint")

    def test_mine_resume_is_byte_identical(self):
        out = self.tmp / "resumed.jsonl"
        state = self.tmp / "state2"
        run("mine", "--offline-fixture", self.universe, "--state-dir", state, "-o", out, "--max-units", "2")
        self.assertFalse(out.exists())
        run("mine", "--offline-fixture", self.universe, "--state-dir", state, "-o", out, "--resume")
        self.assertEqual(out.read_bytes(), self.pairs.read_bytes())

    def test_mine_without_token_or_with_no_matches(self):
        p = run("mine", "--state-dir", self.tmp / "s3", "-o", self.tmp / "x.jsonl", check=False)
        self.assertEqual(p.returncode, 2)
        self.assertIn("XLB_GITHUB_TOKEN", p.stderr)
        out = self.tmp / "none.jsonl"
        run("mine", "--offline-fixture", self.universe, "--state-dir", self.tmp / "s4", "-o", out,
            "--min-stars", "100000000")
        self.assertEqual(out.read_text(), "")

    def test_build_split_stats_score(self):
        ds = self.tmp / "ds.jsonl"
        run("build", "-i", self.pairs, "-o", ds)
        m = self.manifest(ds)
        self.assertTrue(m["with_comments"])
        self.assertIsNotNone(m["criteria"])
        records = jsonl(ds)
        for r in records:
            self.validate(r, "dataset_record")
        self.assertEqual(sum(r["label"] for r in records) * 2, len(records))

        a, b = self.tmp / "a.jsonl", self.tmp / "b.jsonl"
        run("split", "-i", ds, "-o", a, "--seed", "7")
        run("split", "-i", ds, "-o", b, "--seed", "7")
        self.assertEqual(a.read_bytes(), b.read_bytes())
        m = self.manifest(a)
        self.assertEqual((m["seed"], m["ratios"]), (7, [0.8, 0.1, 0.1]))
        for r in jsonl(a):
            self.validate(r, "dataset_record")
            self.assertIn(r["split"], ("train", "valid", "test"))
        self.assertEqual(run("split", "-i", a, "-o", self.tmp / "c.jsonl", check=False).returncode, 2)

        stats_file = self.tmp / "stats.json"
        table = run("stats", "-i", a, "--json-out", stats_file).stdout
        self.assertIn("Function pairs", table)
        stats = json.loads(run("stats", "-i", a, "--json").stdout)
        self.validate(stats, "stats")
        self.assertEqual(stats, json.loads(stats_file.read_text()))

        scores = self.tmp / "scores.jsonl"
        scores.write_text('{"label":1,"score":0.9}\n{"label":0,"score":0.1}\n{"label":1,"score":0.7}\n')
        result = json.loads(run("score", "-i", scores).stdout)
        self.validate(result, "score")
        for k in ("accuracy", "precision", "recall", "f1", "auc"):
            self.assertEqual(result[k], 1.0)

    def test_no_comments(self):
        extra = {
            "pair_id": "00000000000000aa", "repo": "o/r", "sha": "a" * 40, "parent_sha": "b" * 40,
            "file": "m.py", "language": "python", "qualified_name": "f", "mechanisms": ["ctypes"],
            "buggy_code": 'def f(x):\n    """Doc."""\n    # call it\n\n    return lib.g(x)  # raw\n',
            "clean_code": 'def f(x):\n    """Doc."""\n    r = lib.g(x)  # checked\n    return r or 0\n',
            "is_security": False,
        }
        pairs = self.tmp / "commented.jsonl"
        pairs.write_text(self.pairs.read_text() + json.dumps(extra) + "\n")
        ds = self.tmp / "nc.jsonl"
        run("build", "-i", pairs, "-o", ds, "--no-comments")
        self.assertFalse(self.manifest(ds)["with_comments"])
        records = jsonl(ds)
        self.assertEqual(len(records), 8)
        for r in records:
            self.assertNotIn("//", r["code"])
            self.assertNotIn("#", r["code"])
            self.assertNotIn('"""', r["code"])
            self.assertNotIn("\n\n", r["code"])

    def test_malformed_jsonl_reports_line(self):
        bad = self.tmp / "bad.jsonl"
        bad.write_text(self.pairs.read_text().splitlines()[0] + "\n{not json\n")
        p = run("build", "-i", bad, "-o", self.tmp / "o.jsonl", check=False)
        self.assertEqual(p.returncode, 2)
        self.assertIn("line 2", p.stderr)
        bad.write_text('{"label":1,"score":0.5}\n{"label":2,"score":0.5}\n')
        p = run("score", "-i", bad, check=False)
        self.assertEqual(p.returncode, 2)

    def test_usage_errors(self):
        self.assertEqual(run(check=False).returncode, 2)
        self.assertEqual(run("split", "--seed", "x", check=False).returncode, 2)
        self.assertEqual(run("--help").returncode, 0)


if __name__ == "__main__":
    XLB, MAKE_UNIVERSE, SCHEMAS = sys.argv[1:4]
    unittest.main(argv=sys.argv[:1] + sys.argv[4:], verbosity=2)
