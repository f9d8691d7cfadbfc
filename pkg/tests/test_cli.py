import pytest

from machmin.cli import main
from machmin.model import parse_instance, parse_trace


@pytest.fixture
def feasible_file(tmp_path):
    path = tmp_path / "inst.txt"
    path.write_text("machmin v1 2\n0 0 4 2\n1 0 4 2\n")
    return str(path)


def test_gen_random_roundtrip(tmp_path, capsys):
    out = tmp_path / "gen.txt"
    code = main(
        [
            "gen", "--family", "random", "--profile", "agreeable",
            "--n", "5", "--seed", "3", "-o", str(out),
        ]
    )
    assert code == 0
    inst = parse_instance(out.read_text())
    assert inst.n == 5 and inst.is_agreeable


def test_gen_twice_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        main(
            [
                "gen", "--family", "random", "--profile", "equal-p",
                "--n", "6", "--seed", "9", "--p", "2", "-o", str(out),
            ]
        )
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_run_and_verify(feasible_file, tmp_path, capsys):
    code = main(["run", "--policy", "edf", "--machines", "2", feasible_file])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out.startswith("trace preemptive\n")
    trace = tmp_path / "trace.txt"
    trace.write_text(captured.out)
    assert main(["verify", feasible_file, str(trace)]) == 0
    capsys.readouterr()
    assert main(["verify", "--kind", "nonpreemptive", feasible_file, str(trace)]) == 2


def test_run_miss_exit_code(tmp_path, capsys):
    path = tmp_path / "tight.txt"
    path.write_text("machmin v1 2\n0 0 1 1\n1 0 1 1\n")
    assert main(["run", "--policy", "edf", "--machines", "1", str(path)]) == 1


def test_run_nonpreemptive_trace(feasible_file, capsys):
    code = main(["run", "--policy", "earlyfit", feasible_file])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out.startswith("trace nonpreemptive\n")
    schedule = parse_trace(captured.out)
    assert schedule.starts == {0: 0, 1: 0}


def test_opt_outputs(feasible_file, capsys):
    assert main(["opt", "--preemptive", feasible_file]) == 0
    assert capsys.readouterr().out.strip() == "1"
    assert main(["opt", "--strong-density", feasible_file]) == 0
    assert capsys.readouterr().out.strip() == "1"
    assert main(["opt", "--nonpreemptive", feasible_file]) == 0
    assert capsys.readouterr().out.strip() == "1"


def test_opt_cap_exit(tmp_path, capsys):
    rows = ["machmin v1 13"] + [f"{i} 0 40 1" for i in range(13)]
    path = tmp_path / "big.txt"
    path.write_text("\n".join(rows) + "\n")
    assert main(["opt", "--nonpreemptive", str(path)]) == 3


def test_bench_csv(capsys):
    code = main(
        [
            "bench", "--profile", "uniform-d", "--n", "5", "--count", "2",
            "--seed", "4", "--policy", "uniform-p",
        ]
    )
    captured = capsys.readouterr()
    assert code == 0
    lines = captured.out.strip().split("\n")
    assert lines[0].startswith("instance,profile,")
    assert len(lines) == 1 + 2 + 1  # header + rows + summary


def test_adversary_exit(capsys):
    assert main(["adversary", "--policy", "edf", "--m", "4"]) == 1
    assert "forced miss" in capsys.readouterr().out


def test_transform_cli(tmp_path, capsys):
    path = tmp_path / "t.txt"
    path.write_text("machmin v1 1\n0 0 12 4\n")
    code = main(
        ["transform", "--kind", "rshort", "--param", "1/2", str(path)]
    )
    captured = capsys.readouterr()
    assert code == 0
    assert "0 4 12 4" in captured.out


def test_transform_needs_scale(tmp_path, capsys):
    path = tmp_path / "odd.txt"
    path.write_text("machmin v1 1\n0 0 12 5\n")
    assert main(["transform", "--kind", "rshort", "--param", "1/2", str(path)]) == 2
    assert (
        main(
            [
                "transform", "--kind", "rshort", "--param", "1/2",
                "--auto-scale", str(path),
            ]
        )
        == 0
    )


def test_gen_llf_lb_and_dord(tmp_path):
    out = tmp_path / "llf.txt"
    assert main(
        ["gen", "--family", "llf-lb", "--m", "2", "--c", "2", "--k", "1",
         "-o", str(out)]
    ) == 0
    assert parse_instance(out.read_text()).n == 5
    assert main(
        ["gen", "--family", "dord", "--m", "2", "--n", "4", "--k", "1",
         "-o", str(out)]
    ) == 0
    inst = parse_instance(out.read_text())
    assert [j.processing for j in inst.jobs] == [1, 1, 2, 4]


def test_gen_usage_errors(capsys):
    assert main(["gen", "--family", "llf-lb"]) == 2
    assert main(["gen", "--family", "random"]) == 2
    assert main(["gen", "--family", "llf-lb", "--m", "3", "--c", "2",
                 "--k", "1"]) == 2  # odd m rejected by the generator
