"""Runs a short oracle-check and validates summary.json against the shipped schema.

usage: check_schema.py BDEX SCHEMA CONFIG FIXTURE_DIR
"""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema


def main() -> int:
    bdex, schema_path, config, fixture_dir = sys.argv[1:5]
    fixtures = [os.path.join(fixture_dir, name) for name in ("d1_N2.json", "d2_N2.json")]
    with open(schema_path) as fh:
        schema = json.load(fh)
    jsonschema.Draft202012Validator.check_schema(schema)
    with tempfile.TemporaryDirectory() as out:
        cmd = [bdex, "oracle-check", "--config", config, "--out", out,
               "--set", "oracle.fixtures=" + json.dumps(fixtures),
               "--set", "run.replicas=8", "--set", "run.T=20"]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        print(proc.stdout, end="")
        if proc.returncode not in (0, 3):
            print(proc.stderr, file=sys.stderr)
            print(f"FAIL bdex exited with {proc.returncode}")
            return 1
        with open(os.path.join(out, "summary.json")) as fh:
            summary = json.load(fh)
        jsonschema.validate(summary, schema)
        with open(os.path.join(out, "manifest.json")) as fh:
            manifest = json.load(fh)
        if manifest["config_hash"] != summary["config_hash"]:
            print("FAIL manifest and summary disagree on the config hash")
            return 1
    print("PASS summary.json validates against", os.path.basename(schema_path))
    return 0


if __name__ == "__main__":
    sys.exit(main())
