"""Exit codes and stderr messages of the asip CLI."""
import json
import shutil
import subprocess
import sys
from pathlib import Path

CLI, DATA, OUT = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
failures = []


def run(*args, env=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, env=env)


def expect(name, ok, detail=""):
    print(("ok   " if ok else "FAIL ") + name + (": " + detail if detail and not ok else ""))
    if not ok:
        failures.append(name)


shutil.rmtree(OUT, ignore_errors=True)
OUT.mkdir(parents=True)

missing = DATA / "does_not_exist.json"
r = run("moments", "--chain", str(missing), "--out", str(OUT / "missing"))
expect("missing file exits 2", r.returncode == 2, f"code {r.returncode}")
expect("missing file is named", str(missing) in r.stderr, r.stderr)

r = run("moments", "--chain", str(DATA / "malformed_kernel.json"), "--out", str(OUT / "malformed"))
expect("malformed kernel exits 2", r.returncode == 2, f"code {r.returncode}: {r.stderr}")

r = run("mixing", "--chain", str(DATA / "symmetric.json"), "--delta", "0.7")
expect("delta out of range exits 2", r.returncode == 2, f"code {r.returncode}")

r = run("mixing", "--chain", str(DATA / "sticky.json"), "--out", str(OUT / "sticky"))
expect("no n0 exits 3", r.returncode == 3, f"code {r.returncode}: {r.stderr}")
expect("no n0 is reported", "n0 not found" in r.stderr, r.stderr)

r = run("blocks", "--chain", str(DATA / "starved.json"), "--amplitude", "4", "--separation", "1",
        "--horizon", "10", "--out", str(OUT / "starved"))
expect("starvation exits 4", r.returncode == 4, f"code {r.returncode}: {r.stderr}")
expect("starvation names the index", "starved at index" in r.stderr, r.stderr)

r = run("verify", "--inject-fault", "--out", str(OUT / "fault"))
expect("injected fault fails verify", r.returncode != 0, f"code {r.returncode}")
expect("injected fault names the invariant", "kernel-stochastic" in r.stderr, r.stderr)

sims = []
for label in ("a", "b"):
    d = OUT / f"sim-{label}"
    r = run("simulate", "--chain", str(DATA / "symmetric.json"), "--horizon", "200", "--paths", "2000",
            "--seed", "42", "--out", str(d))
    expect(f"simulate run {label} exits 0", r.returncode == 0, r.stderr)
    sims.append(d)
names = sorted(p.name for p in sims[0].iterdir())
expect("simulate writes its files", {"ks.csv", "variance.csv", "rate.csv", "simulate.json"} <= set(names), str(names))
same = all((sims[0] / n).read_bytes() == (sims[1] / n).read_bytes() for n in names)
expect("simulate is reproducible", same)
header = (sims[0] / "ks.csv").read_text().splitlines()[0]
expect("ks.csv header", header == "n,direction_id,ks,stderr", header)

r = run("mixing", "--chain", str(DATA / "symmetric.json"), "--json")
try:
    doc = json.loads(r.stdout)
    expect("mixing --json parses", r.returncode == 0 and doc.get("command") == "mixing", r.stdout[:200])
except json.JSONDecodeError as e:
    expect("mixing --json parses", False, str(e))

sys.exit(1 if failures else 0)
