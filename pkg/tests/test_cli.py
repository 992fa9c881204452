import json
import subprocess
import sys

import numpy as np
import pytest

from subglue import parse_config, read_field
from subglue.cli import main, render, run

VERIFY_KERNEL = """
grid {
  origin -1 -1
  spacing 0.015625
  shape 129 129
}
set P {
  add ball 0 0 1
  sub ball 0 0 0.1
}
field k { kernel 2 0 0 }
command verify {
  field k
  on P
  tol 4.9
}
"""
# tol = 2 h^2 / rho^4 for h = 1/64 and puncture radius 0.1

VERIFY_CONCAVE = """
grid {
  origin -1 -1
  spacing 0.0625
  shape 33 33
}
set O { add ball 0 0 1 }
field neg { file neg.txt }
command verify {
  field neg
  on O
  tol 1e-6
}
"""


def _write_concave_file(tmp_path):
    from subglue import GridDomain, ScalarField, write_field

    h = 0.0625
    lattice = GridDomain((-1, -1), h, (33, 33), np.ones((33, 33), dtype=bool))
    v = ScalarField(lattice, -lattice.distance2_to((0.0, 0.0)))
    write_field(v, tmp_path / "neg.txt")

GLUE_GREEN_BAD_POLE = """
grid {
  origin -1 -1
  spacing 0.0078125
  shape 257 257
}
set O  { add ball 0 0 1 }
set S0 { add ball 0 0 0.2 }
set S  { add ball 0 0 0.5 }
set D  { add ball 0 0 0.3 }
field z { constant 0 }
command glue-green {
  v z
  domain O
  S0 S0
  S S
  D D
  pole 0.9 0
  m_v 0
  M_v 0
  tol 1e-9
}
"""


def write_cfg(tmp_path, text, name="scene.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_verify_kernel_over_punctured_disk_exits_zero(tmp_path):
    cfg = write_cfg(tmp_path, VERIFY_KERNEL)
    code = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "--quiet"])
    assert code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert all(c["pass"] for c in report["checks"])


def test_verify_concave_field_exits_certification_status(tmp_path):
    cfg = write_cfg(tmp_path, VERIFY_CONCAVE)
    _write_concave_file(tmp_path)
    code = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "--quiet"])
    assert code == 4


def test_glue_green_pole_outside_core_exits_precondition(tmp_path):
    cfg = write_cfg(tmp_path, GLUE_GREEN_BAD_POLE)
    code = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "--quiet"])
    assert code == 3
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["error"]["tag"] == "4.3"


def test_parse_error_exits_two(tmp_path):
    cfg = write_cfg(tmp_path, "grid {\n  origin 0 0\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 2
    missing = tmp_path / "nope.cfg"
    assert main(["--config", str(missing), "--out", str(tmp_path), "--quiet"]) == 2


def test_nonconvergence_exits_internal(tmp_path):
    cfg = write_cfg(
        tmp_path,
        """
grid {
  origin -1 -1
  spacing 0.03125
  shape 65 65
}
set D { add ball 0 0 1 }
command green {
  domain D
  pole 0 0
  max-iter 2
}
""",
    )
    assert main(["--config", str(cfg), "--out", str(tmp_path / "out"), "--quiet"]) == 5


def test_runs_are_byte_identical(tmp_path):
    cfg_text = VERIFY_KERNEL
    cfg = parse_config(cfg_text)
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    run(cfg, out_dir=str(out1), do_render=True)
    run(cfg, out_dir=str(out2), do_render=True)
    for name in ("report.json", "field.txt", "field.pgm"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_green_render_deterministic(tmp_path):
    cfg = parse_config(
        """
grid {
  origin -1 -1
  spacing 0.03125
  shape 65 65
}
set D { add ball 0 0 1 }
command green {
  domain D
  pole 0 0
}
"""
    )
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    run(cfg, out_dir=str(out1), do_render=True)
    run(cfg, out_dir=str(out2), do_render=True)
    for name in ("field.pgm", "field.txt", "green_meta.json", "report.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_field_output_round_trips(tmp_path):
    cfg = parse_config(VERIFY_KERNEL)
    report = run(cfg, out_dir=str(tmp_path))
    field = read_field(tmp_path / "field.txt")
    assert field.domain.spacing == cfg.spacing
    assert "field.txt" in report["outputs"]


def test_render_api(tmp_path):
    cfg = parse_config(VERIFY_KERNEL)
    run(cfg, out_dir=str(tmp_path))
    out = render(tmp_path / "field.txt", tmp_path / "img.pgm")
    data = (tmp_path / "img.pgm").read_bytes()
    assert data.startswith(b"P2\n")
    assert out.endswith("img.pgm")


def test_green_command_writes_sidecar(tmp_path):
    cfg = write_cfg(
        tmp_path,
        """
grid {
  origin -1 -1
  spacing 0.03125
  shape 65 65
}
set D  { add ball 0 0 1 }
set S0 { add ball 0 0 0.5 }
command green {
  domain D
  pole 0 0
  S0 S0
}
""",
    )
    code = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "--quiet"])
    assert code == 0
    meta = json.loads((tmp_path / "out" / "green_meta.json").read_text())
    assert meta["pole"] == [0.0, 0.0]
    assert meta["residual"] >= 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["constants"]["M_g"] == pytest.approx(np.log(2.0), abs=0.05)


def test_capacity_command(tmp_path):
    cfg = write_cfg(
        tmp_path,
        """
grid {
  origin -1 -1
  spacing 0.5
  shape 5 5
}
command capacity {
  mode fekete
  circle 0 0 1 512
  n 64
}
""",
    )
    code = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "--quiet"])
    assert code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["capacity"]["capacity"] == pytest.approx(64 ** (1 / 63), rel=0.01)
    assert (tmp_path / "out" / "points.txt").exists()


def test_glue_full_demo_scene_exits_zero(tmp_path):
    import pathlib

    cfg = pathlib.Path(__file__).parent.parent / "demos" / "scene_configs" / "glue_full_disk.cfg"
    out = tmp_path / "out"
    code = main(["--config", str(cfg), "--out", str(out), "--quiet"])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    conclusion_tags = {"4.5", "4.11h", "4.11=", "4.11o"}
    seen = {c["tag"]: c["pass"] for c in report["checks"]}
    assert conclusion_tags <= set(seen)
    assert all(seen[t] for t in conclusion_tags)


def test_console_module_smoke(tmp_path):
    cfg = write_cfg(tmp_path, VERIFY_CONCAVE)
    _write_concave_file(tmp_path)
    proc = subprocess.run(
        [sys.executable, "-m", "subglue", "--config", str(cfg),
         "--out", str(tmp_path / "out"), "--quiet"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 4


def test_seed_is_echoed_not_used(tmp_path):
    cfg = parse_config(VERIFY_KERNEL)
    rep = run(cfg, out_dir=str(tmp_path / "s"), seed=42)
    report = json.loads((tmp_path / "s" / "report.json").read_text())
    assert report["echo"]["seed"] == 42
    rep2 = run(cfg, out_dir=str(tmp_path / "s2"), seed=43)
    a = (tmp_path / "s" / "field.txt").read_bytes()
    b = (tmp_path / "s2" / "field.txt").read_bytes()
    assert a == b  # the seed changes nothing but the echo
