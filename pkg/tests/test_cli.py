"""Command-line interface: config parsing, field dumps, golden outputs,
exit codes, and byte-level determinism."""

import json
import math

import numpy as np
import pytest

from liouville import ConfigError, fieldio
from liouville.cli import main, run
from liouville.config import load_config

EXCHANGE = [[0.0, 1.0], [1.0, 0.0]]
TORUS = {"type": "closed", "genus": 1}


def write_config(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def run_json(capsys, *argv):
    code = main([*argv, "--json"])
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else None
    return code, payload


# --------------------------------------------------------- config parsing


def test_minimal_config_gets_defaults(tmp_path):
    cfg = load_config(write_config(tmp_path, {"matrix": [[1.0]]}))
    assert cfg.matrix.n == 1
    assert cfg.rho is None
    assert cfg.surface is None
    assert cfg.singularities.count == 0
    assert cfg.solver.resolution == 64
    assert cfg.solver.tol == 1e-8
    assert cfg.solver.steps == 10
    assert cfg.exponent_cap is None
    assert cfg.critical_tol is None
    assert cfg.sigma is None and cfg.mu is None and cfg.direction is None


def test_full_config_round_trip(tmp_path):
    data = {
        "matrix": EXCHANGE,
        "rho": [1.0, 2.0],
        "surface": {"type": "closed", "genus": 2},
        "singularities": [
            {"gamma": 1.0, "position": [0.25, 0.25]},
            {"gamma": 0.5, "position": [0.75, 0.5]},
        ],
        "solver": {"resolution": 32, "tol": 1e-10, "steps": 5},
        "caps": {"exponent_cap": 12.0, "tolerance": 1e-6},
        "sigma": [4.0, 4.0],
        "mu": 2.0,
        "direction": [1.0, 1.0],
    }
    cfg = load_config(write_config(tmp_path, data))
    assert cfg.surface.chi == -2
    np.testing.assert_array_equal(cfg.rho, [1.0, 2.0])
    assert cfg.singularities.gammas == (1.0, 0.5)
    assert cfg.singularities.positions == ((0.25, 0.25), (0.75, 0.5))
    assert cfg.solver.resolution == 32
    assert cfg.exponent_cap == 12.0
    assert cfg.critical_tol == 1e-6
    assert cfg.mu == 2.0
    np.testing.assert_array_equal(cfg.direction, [1.0, 1.0])


def test_surface_forms(tmp_path):
    chi = load_config(
        write_config(tmp_path, {"matrix": [[1.0]], "surface": {"chi": -3}})
    )
    assert chi.surface.chi == -3
    dom = load_config(
        write_config(
            tmp_path,
            {"matrix": [[1.0]], "surface": {"type": "domain", "holes": 4}},
            name="dom.json",
        )
    )
    assert dom.surface.chi == -3


@pytest.mark.parametrize(
    ("data", "anchor"),
    [
        ({}, "matrix"),
        ({"matrix": []}, "matrix"),
        ({"matrix": [[1.0]], "bogus": 1}, "unknown config field"),
        ({"matrix": [1.0]}, "matrix[0]"),
        ({"matrix": [[True]]}, "matrix[0][0]"),
        ({"matrix": [[1.0]], "rho": [1.0, 2.0]}, "expected 1 entries"),
        ({"matrix": [[1.0]], "rho": 3.0}, "rho"),
        ({"matrix": [[1.0]], "surface": {"chi": 0, "genus": 1}}, "unexpected"),
        ({"matrix": [[1.0]], "surface": {"type": "torus"}}, "surface.type"),
        (
            {"matrix": [[1.0]], "surface": {"type": "closed", "genus": -1}},
            "surface.genus",
        ),
        ({"matrix": [[1.0]], "singularities": [{"pos": 1}]}, "gamma"),
        (
            {
                "matrix": [[1.0]],
                "singularities": [
                    {"gamma": 1.0, "position": [0.1, 0.1]},
                    {"gamma": 2.0},
                ],
            },
            "all sources have positions or none",
        ),
        (
            {
                "matrix": [[1.0]],
                "singularities": [{"gamma": 1.0, "position": [0.1]}],
            },
            "position",
        ),
        ({"matrix": [[1.0]], "solver": {"mode": "fast"}}, "unexpected"),
        ({"matrix": [[1.0]], "solver": {"resolution": 33}}, "even"),
        ({"matrix": [[1.0]], "solver": {"tol": 0.0}}, "positive"),
        ({"matrix": [[1.0]], "solver": {"steps": 0}}, "at least 1"),
        ({"matrix": [[1.0]], "caps": {"depth": 3}}, "unexpected"),
        ({"matrix": [[1.0]], "caps": {"exponent_cap": -1.0}}, "positive"),
        ({"matrix": [[1.0]], "mu": 0.0}, "positive"),
    ],
)
def test_config_errors_name_their_field(tmp_path, data, anchor):
    path = write_config(tmp_path, data)
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert anchor in str(info.value)


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config(tmp_path / "absent.json")


def test_bad_json_reports_line_and_column(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"matrix": [[1.0]\n')
    with pytest.raises(ConfigError) as info:
        load_config(p)
    msg = str(info.value)
    assert "invalid JSON" in msg
    assert ":2:" in msg  # error is on line 2


def test_non_object_top_level_rejected(tmp_path):
    p = tmp_path / "list.json"
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="top-level"):
        load_config(p)


def test_instance_requires_surface_and_rho(tmp_path):
    cfg = load_config(write_config(tmp_path, {"matrix": [[1.0]]}))
    with pytest.raises(ConfigError, match="surface"):
        cfg.require_surface()
    with pytest.raises(ConfigError, match="rho"):
        cfg.require_rho()


# ------------------------------------------------------------ field dumps


def test_binary_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    values = rng.standard_normal((2, 8, 8))
    path = tmp_path / "fields.bin"
    fieldio.write_binary(path, values)
    with open(path, "rb") as f:
        assert f.readline() == b"2 8\n"
    back = fieldio.read_binary(path)
    np.testing.assert_array_equal(back, values)


def test_binary_rejects_malformed_dumps(tmp_path):
    bad_header = tmp_path / "bad_header.bin"
    bad_header.write_bytes(b"hello world extra\n")
    with pytest.raises(ValueError, match="header"):
        fieldio.read_binary(bad_header)
    truncated = tmp_path / "short.bin"
    truncated.write_bytes(b"1 4\n" + b"\0" * 8)
    with pytest.raises(ValueError, match="payload bytes"):
        fieldio.read_binary(truncated)
    with pytest.raises(ValueError, match="shape"):
        fieldio.write_binary(tmp_path / "x.bin", np.zeros((1, 4, 5)))


def test_csv_layout(tmp_path):
    values = np.arange(2 * 4 * 4, dtype=np.float64).reshape(2, 4, 4)
    path = tmp_path / "fields.csv"
    fieldio.write_csv(path, values)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,u1,u2"
    assert len(lines) == 1 + 16
    assert lines[1] == "0.0,0.0,0.0,16.0"
    assert lines[2].startswith("0.0,0.25,")


# --------------------------------------------------------- golden outputs


def torus_degree_config(tmp_path):
    return write_config(
        tmp_path,
        {
            "matrix": EXCHANGE,
            "surface": TORUS,
            "singularities": [{"gamma": 1.0}, {"gamma": 2.0}],
            "rho": [12.0 * math.pi, 12.0 * math.pi],
        },
    )


def test_degree_command_on_the_torus(tmp_path, capsys):
    code, payload = run_json(capsys, "degree", torus_degree_config(tmp_path))
    assert code == 0
    assert payload["degree"] == 3
    assert payload["region"] == 1
    assert payload["q"] == pytest.approx(1.5, abs=1e-12)
    assert payload["level_below"] == 1.0
    assert payload["level_above"] == 2.0
    assert payload["partial_coefficients"] == [1, 2]


def test_spectrum_command(tmp_path, capsys):
    path = write_config(tmp_path, {"matrix": [[1.0]]})
    code, payload = run_json(capsys, "spectrum", path, "--cap", "3.5")
    assert code == 0
    assert payload == {"cap": 3.5, "levels": [1.0, 2.0, 3.0]}


def test_exponent_cap_can_come_from_the_config(tmp_path, capsys):
    path = write_config(
        tmp_path, {"matrix": [[1.0]], "caps": {"exponent_cap": 3.5}}
    )
    code, payload = run_json(capsys, "spectrum", path)
    assert code == 0
    assert payload["levels"] == [1.0, 2.0, 3.0]


def test_series_command(tmp_path, capsys):
    path = write_config(
        tmp_path,
        {
            "matrix": EXCHANGE,
            "surface": TORUS,
            "singularities": [{"gamma": 1.0}, {"gamma": 2.0}],
        },
    )
    code, payload = run_json(capsys, "series", path, "--cap", "3.5")
    assert code == 0
    assert payload["chi"] == 0
    terms = {t["exponent"]: t["coefficient"] for t in payload["terms"]}
    assert terms == {0.0: 1, 1.0: 2, 2.0: 2, 3.0: 1}


def test_check_matrix_passing(tmp_path, capsys):
    path = write_config(tmp_path, {"matrix": EXCHANGE})
    code, payload = run_json(capsys, "check-matrix", path)
    assert code == 0
    assert payload["standard_hypothesis"] == {"holds": True, "violations": []}
    assert payload["strong_interaction_hypothesis"]["holds"] is True


def test_check_matrix_reports_violations_with_exit_2(tmp_path, capsys):
    path = write_config(tmp_path, {"matrix": [[2.0, 1.0], [1.0, 2.0]]})
    code, payload = run_json(capsys, "check-matrix", path)
    assert code == 2
    assert payload["standard_hypothesis"]["holds"] is True
    strong = payload["strong_interaction_hypothesis"]
    assert strong["holds"] is False
    conditions = {v["condition"] for v in strong["violations"]}
    assert "inverse-diagonal" in conditions
    diag = [
        v for v in strong["violations"] if v["condition"] == "inverse-diagonal"
    ]
    assert diag[0]["value"] == pytest.approx(2.0 / 3.0)


def test_check_matrix_singular_input(tmp_path, capsys):
    path = write_config(tmp_path, {"matrix": [[1.0, 1.0], [1.0, 1.0]]})
    code, payload = run_json(capsys, "check-matrix", path)
    assert code == 2
    strong = payload["strong_interaction_hypothesis"]
    assert strong["holds"] is False
    assert "error" in strong


def test_pohozaev_command(tmp_path, capsys):
    path = write_config(
        tmp_path,
        {
            "matrix": EXCHANGE,
            "sigma": [4.0, 4.0],
            "mu": 1.0,
            "direction": [1.0, 1.0],
        },
    )
    code, payload = run_json(capsys, "pohozaev", path)
    assert code == 0
    assert payload["residual"] == pytest.approx(0.0, abs=1e-12)
    assert payload["minimal_mass"]["holds"] is True
    assert payload["hypersurface"]["sigma"] == pytest.approx([4.0, 4.0])
    assert abs(payload["hypersurface"]["residual"]) <= 1e-12 * 32.0


def test_pohozaev_requires_sigma_and_mu(tmp_path, capsys):
    path = write_config(tmp_path, {"matrix": EXCHANGE})
    assert main(["pohozaev", path]) == 1
    assert "error[ConfigError]" in capsys.readouterr().err


# ------------------------------------------------------- solve and verify


def singular_solve_config(tmp_path, **overrides):
    data = {
        "matrix": [[1.0]],
        "surface": TORUS,
        "singularities": [{"gamma": 1.0, "position": [0.5, 0.5]}],
        "rho": [4.0 * math.pi],
        "solver": {"resolution": 32, "tol": 1e-8, "steps": 10},
    }
    data.update(overrides)
    return write_config(tmp_path, data)


def test_solve_then_verify_round_trip(tmp_path, capsys):
    cfg = singular_solve_config(tmp_path)
    dump = str(tmp_path / "fields.bin")
    code, payload = run_json(capsys, "solve", cfg, "--out", dump)
    assert code == 0
    assert payload["resolution"] == 32
    assert payload["q"] == pytest.approx(0.5, abs=1e-12)
    assert payload["residual_norm"] <= 1e-8
    assert payload["max_norm"] > 0.1
    assert len(payload["steps"]) == 10
    assert payload["steps"][-1]["t"] == 1.0
    assert (tmp_path / "fields.bin").exists()
    assert (tmp_path / "fields.bin.csv").exists()

    code, report = run_json(capsys, "verify", cfg, "--field", dump)
    assert code == 0
    assert report["normalized_masses"] == pytest.approx([1.0], abs=1e-12)
    assert abs(report["field_means"][0]) <= 1e-12
    assert report["residual_norm"] <= 1e-8
    assert abs(report["residual_means"][0]) <= 1e-10


def test_solve_output_is_deterministic(tmp_path, capsys):
    cfg = singular_solve_config(tmp_path)
    out1 = tmp_path / "a.bin"
    out2 = tmp_path / "b.bin"
    assert main(["solve", cfg, "--json", "--out", str(out1)]) == 0
    text1 = capsys.readouterr().out
    assert main(["solve", cfg, "--json", "--out", str(out2)]) == 0
    text2 = capsys.readouterr().out
    assert text1 == text2
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "a.bin.csv").read_bytes() == (
        tmp_path / "b.bin.csv"
    ).read_bytes()


def test_solve_trivial_instance_stays_at_zero(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "matrix": [[1.0]],
            "surface": TORUS,
            "rho": [1.0],
            "solver": {"resolution": 16},
        },
    )
    code, payload = run_json(capsys, "solve", cfg)
    assert code == 0
    assert payload["max_norm"] == 0.0
    assert payload["residual_norm"] == 0.0


def test_resolution_flag_overrides_config(tmp_path, capsys):
    cfg = singular_solve_config(tmp_path)
    code, payload = run_json(capsys, "solve", cfg, "--resolution", "16")
    assert code == 0
    assert payload["resolution"] == 16


def test_verify_rejects_component_mismatch(tmp_path, capsys):
    cfg = singular_solve_config(tmp_path)
    dump = str(tmp_path / "f.bin")
    assert main(["solve", cfg, "--out", dump]) == 0
    capsys.readouterr()
    two = write_config(
        tmp_path,
        {
            "matrix": EXCHANGE,
            "surface": TORUS,
            "rho": [1.0, 1.0],
        },
        name="two.json",
    )
    assert main(["verify", two, "--field", dump]) == 1
    err = capsys.readouterr().err
    assert "error[ConfigError]" in err
    assert "1 components" in err


def test_verify_rejects_resolution_mismatch(tmp_path, capsys):
    cfg = singular_solve_config(tmp_path)
    dump = str(tmp_path / "f.bin")
    assert main(["solve", cfg, "--out", dump]) == 0
    capsys.readouterr()
    assert main(["verify", cfg, "--field", dump, "--resolution", "64"]) == 1
    assert "does not match" in capsys.readouterr().err


def test_solve_requires_a_flat_surface(tmp_path, capsys):
    cfg = singular_solve_config(tmp_path, surface={"type": "closed", "genus": 0})
    assert main(["solve", cfg]) == 1
    assert "chi must be 0" in capsys.readouterr().err


def test_solve_requires_source_positions(tmp_path, capsys):
    cfg = singular_solve_config(tmp_path, singularities=[{"gamma": 1.0}])
    assert main(["solve", cfg]) == 1
    assert "positions" in capsys.readouterr().err


# -------------------------------------------------------------- exit codes


def test_exit_1_on_missing_config(tmp_path, capsys):
    assert main(["degree", str(tmp_path / "absent.json")]) == 1
    assert "error[ConfigError]" in capsys.readouterr().err


def test_exit_1_on_invalid_json(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{nope")
    assert main(["spectrum", str(p)]) == 1
    assert "invalid JSON" in capsys.readouterr().err


def test_exit_1_on_unknown_field(tmp_path, capsys):
    p = write_config(tmp_path, {"matrix": [[1.0]], "extra": 1})
    assert main(["spectrum", str(p)]) == 1
    assert "unknown config field" in capsys.readouterr().err


def test_exit_2_on_hypothesis_violation(tmp_path, capsys):
    p = write_config(
        tmp_path,
        {
            "matrix": [[2.0, 1.0], [1.0, 2.0]],
            "surface": TORUS,
            "rho": [1.0, 1.0],
        },
    )
    assert main(["degree", p]) == 2
    assert "error[HypothesisViolation]" in capsys.readouterr().err


def test_exit_3_on_the_critical_surface(tmp_path, capsys):
    p = write_config(
        tmp_path,
        {
            "matrix": [[1.0]],
            "surface": TORUS,
            "rho": [8.0 * math.pi],
        },
    )
    assert main(["degree", p]) == 3
    assert "error[OnCriticalSurface]" in capsys.readouterr().err


def test_exit_4_on_solver_non_convergence(tmp_path, capsys):
    # An unreachable tolerance stalls the damped Newton iteration; both
    # stall flavors (budget exhausted, damping floor) map to exit 4.
    cfg = singular_solve_config(
        tmp_path, solver={"resolution": 16, "tol": 1e-30, "steps": 1}
    )
    assert main(["solve", cfg]) == 4
    err = capsys.readouterr().err
    assert "error[StepFailure]" in err or "error[NoConvergence]" in err


def test_critical_tolerance_flows_from_config_and_flag(tmp_path, capsys):
    p = write_config(
        tmp_path,
        {
            "matrix": [[1.0]],
            "surface": TORUS,
            "rho": [8.8 * math.pi],
            "caps": {"tolerance": 0.2},
        },
    )
    assert main(["degree", p]) == 3  # q = 1.1 is within 0.2 of level 1
    capsys.readouterr()
    code, payload = run_json(capsys, "degree", p, "--tol-critical", "1e-8")
    assert code == 0
    assert payload["region"] == 1
    assert payload["degree"] == 1


# -------------------------------------------------------------- interface


def test_run_wrapper_matches_main(tmp_path, capsys):
    p = write_config(tmp_path, {"matrix": [[1.0]]})
    assert run("spectrum", p, "--cap", "2.5") == 0
    assert "levels" in capsys.readouterr().out


def test_human_readable_output(tmp_path, capsys):
    code = main(["degree", torus_degree_config(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "degree" in out
    assert "3" in out
    assert "{" not in out  # prose, not JSON


def test_missing_subcommand_exits_via_argparse(capsys):
    with pytest.raises(SystemExit):
        main([])
    capsys.readouterr()
