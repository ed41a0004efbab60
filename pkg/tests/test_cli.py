import json

import pytest

from deflab import commands
from deflab.cli import main
from deflab.diagrams import Lemma3Report


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(out):
    return [json.loads(line) for line in out.splitlines() if line.strip()]


class TestTheory:
    def test_pair2(self, capsys):
        code, out, _ = run(capsys, "theory", "pair2")
        (record,) = records(out)
        assert code == 0
        assert record["rate"] == "7/2"
        assert record["real"] == pytest.approx(0.9698026166, abs=1e-10)
        assert not record["conjectural"]

    def test_ternary_rate_is_flagged(self, capsys):
        _, out, _ = run(capsys, "theory", "dary", "--d", "3")
        (record,) = records(out)
        assert record["rate"] == "127/2"
        assert record["conjectural"]

    def test_exceedance_defaults_to_triples(self, capsys):
        _, out, _ = run(capsys, "theory", "exceedance")
        assert records(out)[0]["rate"] == "441"

    def test_expected_count(self, capsys):
        _, out, _ = run(capsys, "theory", "expected-count", "--n", "3")
        (record,) = records(out)
        assert record["exact"] == "5/3"
        assert record["limit"] == "7/2"

    def test_partial_sums(self, capsys):
        _, out, err = run(capsys, "theory", "partial-sum", "--K", "2")
        first, second = records(out)
        assert (first["exact"], first["bound"]) == ("7/2", "upper")
        assert (second["exact"], second["bound"]) == ("-21/8", "lower")
        assert "0.9698026166" in err

    def test_bad_rate(self, capsys):
        code, _, _ = run(capsys, "theory", "partial-sum", "--rate", "seven")
        assert code == 2

    def test_missing_order(self, capsys):
        code, _, err = run(capsys, "theory", "expected-count")
        assert code == 2
        assert "--n" in err


class TestExact:
    def test_order_two(self, capsys):
        code, out, _ = run(capsys, "exact", "--n", "2")
        (record,) = records(out)
        assert code == 0
        assert record["p"] == "1"
        assert record["tables"] == 16

    def test_guard_needs_force(self, capsys):
        code, out, err = run(capsys, "exact", "--n", "4")
        assert code == 2
        assert out == ""
        assert "force" in err


class TestDiagrams:
    def test_count(self, capsys):
        code, out, _ = run(capsys, "diagrams", "--k", "2", "--count")
        (record,) = records(out)
        assert code == 0
        assert record["count"] == 294
        assert record["base_graphs"] == 6
        assert record["perfect_matchings"] == 147

    def test_list(self, capsys):
        _, out, _ = run(capsys, "diagrams", "--k", "1", "--list")
        listed = records(out)
        assert len(listed) == 7
        assert all(r["realizable"] and r["alpha"] == 2 for r in listed)

    def test_verify(self, capsys):
        code, out, err = run(capsys, "verify-lemma3", "--k-max", "2")
        assert code == 0
        assert "checked 294, violations 0" in err
        assert records(out)[0]["by_k"] == {"1": 7, "2": 294}

    def test_verify_reports_violations(self, capsys, monkeypatch):
        broken = Lemma3Report(k_max=1, checked=7, by_k={1: 7},
                              violations=[{"diagram": {"v": 2, "edges": [[1, 2, "T1"]]}, "problems": ["alpha"]}])
        monkeypatch.setattr(commands, "verify_lemma3", lambda k_max: broken)
        code, _, err = run(capsys, "verify-lemma3", "--k-max", "1")
        assert code == 1
        assert "violations 1" in err


class TestClassify:
    def test_xor(self, capsys, table_file):
        code, out, _ = run(capsys, "classify", table_file("2\n0 1\n1 0\n"))
        *subsets, summary = records(out)
        assert code == 0
        assert [r["type"] for r in subsets] == ["T7"]
        assert summary["diagram"] == {"v": 2, "edges": [[1, 2, "T7"]]}

    def test_constant_table(self, capsys, table_file):
        path = table_file("3\n0 0 0\n0 0 0\n0 0 0\n")
        _, out, _ = run(capsys, "classify", path)
        (summary,) = records(out)
        assert summary["subsets"] == 0
        assert summary["diagram"] is None

        _, out, _ = run(capsys, "classify", path, "--include-t0")
        *subsets, summary = records(out)
        assert [r["type"] for r in subsets] == ["T0"] * 3
        assert summary["diagram"] is None

    def test_malformed_file(self, capsys, table_file):
        code, out, err = run(capsys, "classify", table_file("2\n0 1\n1\n"))
        assert code == 2
        assert out == ""
        assert "line" in err

    def test_binary_file(self, capsys, tmp_path):
        path = tmp_path / "table.bin"
        path.write_bytes(b"2\n0 1\n1 \xff\n")
        code, out, err = run(capsys, "classify", str(path))
        assert code == 2
        assert out == ""
        assert "line 3" in err

    def test_binary_diagram_file(self, capsys, tmp_path):
        path = tmp_path / "diagram.bin"
        path.write_bytes(b"\xff\xfe")
        code, _, _ = run(capsys, "witness", "--diagram", "@" + str(path))
        assert code == 2

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "classify", str(tmp_path / "absent.txt"))
        assert code == 2

    def test_unknown_flag(self, capsys):
        code, _, _ = run(capsys, "classify", "--bogus")
        assert code == 2


class TestWitness:
    def test_t7(self, capsys):
        code, out, _ = run(capsys, "witness", "--diagram", '{"v":2,"edges":[[1,2,"T7"]]}')
        (record,) = records(out)
        assert code == 0
        assert record["table"] == "2\n0 1\n1 0\n"
        assert record["verified"]

    def test_from_file(self, capsys, table_file):
        path = table_file('{"v":2,"edges":[[1,2,"T5"]]}', name="diagram.json")
        _, out, _ = run(capsys, "witness", "--diagram", "@" + path)
        assert records(out)[0]["table"] == "2\n0 0\n1 1\n"

    def test_unrealizable(self, capsys):
        triangle = '{"v":3,"edges":[[1,2,"T7"],[2,3,"T7"],[1,3,"T1"]]}'
        code, out, _ = run(capsys, "witness", "--diagram", triangle)
        assert code == 2
        assert out == ""

    def test_bad_json(self, capsys):
        code, _, _ = run(capsys, "witness", "--diagram", "{v:2")
        assert code == 2


class TestSampling:
    def test_mc_does_not_depend_on_threads(self, capsys):
        argv = ["mc", "--n", "20", "--samples", "2000", "--seed", "5"]
        _, single, _ = run(capsys, *argv, "--threads", "1")
        _, double, _ = run(capsys, *argv, "--threads", "2")
        assert single == double
        assert records(single)[0]["samples"] == 2000

    def test_mc_requires_samples(self, capsys):
        code, _, _ = run(capsys, "mc", "--n", "20")
        assert code == 2

    @pytest.mark.parametrize("command", ["mc", "exact", "independence"])
    def test_include_t0_only_on_typed_views(self, capsys, command):
        code, out, _ = run(capsys, command, "--n", "3", "--samples", "10", "--include-t0")
        assert code == 2
        assert out == ""

    def test_seed_out_of_range(self, capsys):
        code, _, _ = run(capsys, "mc", "--n", "5", "--samples", "10", "--seed", str(2 ** 64))
        assert code == 2

    def test_sweep_csv(self, capsys):
        code, out, _ = run(capsys, "sweep", "--n-list", "2,5", "--samples", "200", "--format", "csv")
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == "n,p_hat,stderr,lambda_n,poisson_approx,limit"
        assert len(lines) == 3
        assert lines[1].startswith("2,1.0,0.0,")

    def test_histogram(self, capsys):
        code, out, _ = run(capsys, "histogram", "--n", "2", "--samples", "500", "--include-t0")
        (record,) = records(out)
        assert code == 0
        assert record["counts"] == {"1": 500}
