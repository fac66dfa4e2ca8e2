"""Contribution-set reading and diagram rendering."""

import random

import pytest

from poolfigs.cli import contributions_main
from poolfigs.contributions import plot_contributions, region_counts
from poolfigs.errors import DataError
from poolfigs.tables import read_contribution_sets

from figtools import gid_texts, write_solved, write_unique


def exclusive(sets, label):
    mine = set(sets[label])
    for other, theirs in sets.items():
        if other != label:
            mine -= theirs
    return len(mine)


def write_fixture(tmp_path, ensemble, sets):
    """unique.csv and solved_sets.csv for one ensemble, internally consistent."""
    unique = write_unique(
        tmp_path / "unique.csv",
        [(ensemble, lab, exclusive(sets, lab)) for lab in sets],
    )
    solved = write_solved(
        tmp_path / "solved_sets.csv",
        [(ensemble, lab, pid) for lab in sets for pid in sorted(sets[lab])],
    )
    return unique, solved


class TestReadSets:
    def test_roster_order_and_empty_solvers(self, tmp_path):
        unique = write_unique(
            tmp_path / "unique.csv", [("duo", "zeta", 2), ("duo", "alpha", 0)]
        )
        solved = write_solved(
            tmp_path / "solved_sets.csv", [("duo", "zeta", "p1"), ("duo", "zeta", "p2")]
        )
        (ens,) = read_contribution_sets(unique, solved)
        assert ens.members == ("zeta", "alpha")  # file order, not sorted
        assert ens.solved["zeta"] == frozenset({"p1", "p2"})
        assert ens.solved["alpha"] == frozenset()

    def test_solved_model_outside_roster(self, tmp_path):
        unique = write_unique(
            tmp_path / "unique.csv", [("duo", "a", 0), ("duo", "b", 0)]
        )
        solved = write_solved(tmp_path / "solved_sets.csv", [("duo", "ghost", "p1")])
        with pytest.raises(DataError, match="'ghost' is not in ensemble 'duo'"):
            read_contribution_sets(unique, solved)

    def test_rosterless_ensembles_are_skipped(self, tmp_path):
        unique = write_unique(
            tmp_path / "unique.csv", [("duo", "a", 1), ("duo", "b", 0)]
        )
        solved = write_solved(
            tmp_path / "solved_sets.csv",
            [("solo", "a", "p9"), ("duo", "a", "p1")],
        )
        (ens,) = read_contribution_sets(unique, solved)
        assert ens.name == "duo"

    def test_disagreeing_unique_counts(self, tmp_path):
        unique = write_unique(
            tmp_path / "unique.csv", [("duo", "a", 5), ("duo", "b", 0)]
        )
        solved = write_solved(tmp_path / "solved_sets.csv", [("duo", "a", "p1")])
        with pytest.raises(DataError, match="disagree for 'a' in 'duo'"):
            read_contribution_sets(unique, solved)

    def test_non_integer_unique_count(self, tmp_path):
        unique = write_unique(tmp_path / "unique.csv", [("duo", "a", "many")])
        solved = write_solved(tmp_path / "solved_sets.csv", [])
        with pytest.raises(DataError, match="not an integer"):
            read_contribution_sets(unique, solved)

    def test_wrong_header(self, tmp_path):
        bad = tmp_path / "unique.csv"
        bad.write_text("ensemble,model\nduo,a\n")
        solved = write_solved(tmp_path / "solved_sets.csv", [])
        with pytest.raises(DataError, match="missing column"):
            read_contribution_sets(bad, solved)


class TestRegionCounts:
    def test_two_set_split(self):
        counts = region_counts(
            {"a": frozenset({"1", "2"}), "b": frozenset({"2", "3"})}
        )
        assert counts == {
            frozenset({"a"}): 1,
            frozenset({"b"}): 1,
            frozenset({"a", "b"}): 1,
        }

    def test_identical_sets_share_one_region(self):
        counts = region_counts(
            {"a": frozenset({"x", "y"}), "b": frozenset({"x", "y"})}
        )
        assert counts == {
            frozenset({"a"}): 0,
            frozenset({"b"}): 0,
            frozenset({"a", "b"}): 2,
        }


class TestVennRendering:
    def test_two_set_example_regions(self, tmp_path):
        sets = {"a": {"1", "2"}, "b": {"2", "3"}}
        unique, solved = write_fixture(tmp_path, "duo", sets)
        out = plot_contributions(unique, solved, tmp_path / "fig.svg")
        assert gid_texts(out, "region:duo:") == {
            "region:duo:a": "1",
            "region:duo:b": "1",
            "region:duo:a+b": "1",
        }

    def test_identical_sets_annotate_shared_region(self, tmp_path):
        sets = {"a": {"x", "y"}, "b": {"x", "y"}}
        unique, solved = write_fixture(tmp_path, "duo", sets)
        out = plot_contributions(unique, solved, tmp_path / "fig.svg")
        regions = gid_texts(out, "region:duo:")
        assert regions["region:duo:a+b"] == "2"
        assert regions["region:duo:a"] == "0"
        assert regions["region:duo:b"] == "0"

    def test_three_set_regions_match_set_algebra_oracle(self, tmp_path):
        rng = random.Random(31415)
        pool = [f"p{i:02d}" for i in range(40)]
        sets = {
            lab: {pid for pid in pool if rng.random() < 0.45}
            for lab in ("a", "b", "c")
        }
        unique, solved = write_fixture(tmp_path, "trio", sets)
        out = plot_contributions(unique, solved, tmp_path / "fig.svg")

        a, b, c = sets["a"], sets["b"], sets["c"]
        oracle = {
            "region:trio:a": len(a - b - c),
            "region:trio:b": len(b - a - c),
            "region:trio:c": len(c - a - b),
            "region:trio:a+b": len((a & b) - c),
            "region:trio:a+c": len((a & c) - b),
            "region:trio:b+c": len((b & c) - a),
            "region:trio:a+b+c": len(a & b & c),
        }
        assert gid_texts(out, "region:trio:") == {
            gid: str(n) for gid, n in oracle.items()
        }


class TestMembershipRendering:
    def test_four_set_bars_cover_populated_regions(self, tmp_path):
        sets = {
            "m1": {"p1", "p2"},
            "m2": {"p2"},
            "m3": {"p3"},
            "m4": set(),
        }
        unique, solved = write_fixture(tmp_path, "quad", sets)
        out = plot_contributions(unique, solved, tmp_path / "fig.svg")
        assert gid_texts(out, "region:quad:") == {
            "region:quad:m1": "1",
            "region:quad:m1+m2": "1",
            "region:quad:m3": "1",
        }


class TestLimitsAndOutputs:
    def test_more_than_five_models_rejected(self, tmp_path):
        sets = {f"m{i}": {f"p{i}"} for i in range(6)}
        unique, solved = write_fixture(tmp_path, "six", sets)
        with pytest.raises(DataError, match="6 models.*split"):
            plot_contributions(unique, solved, tmp_path / "fig.svg")

    def test_multiple_ensembles_render_side_by_side(self, tmp_path):
        unique = write_unique(
            tmp_path / "unique.csv",
            [("duo", "a", 1), ("duo", "b", 1), ("trio", "a", 0),
             ("trio", "b", 0), ("trio", "c", 1)],
        )
        solved = write_solved(
            tmp_path / "solved_sets.csv",
            [("duo", "a", "p1"), ("duo", "b", "p2"),
             ("trio", "a", "p1"), ("trio", "b", "p1"), ("trio", "c", "p3")],
        )
        out = plot_contributions(unique, solved, tmp_path / "fig.svg")
        assert gid_texts(out, "region:duo:")["region:duo:a"] == "1"
        assert gid_texts(out, "region:trio:")["region:trio:a+b"] == "1"

    def test_raster_output(self, tmp_path):
        sets = {"a": {"1"}, "b": {"2"}}
        unique, solved = write_fixture(tmp_path, "duo", sets)
        out = plot_contributions(unique, solved, tmp_path / "fig.png")
        assert out.read_bytes()[:4] == b"\x89PNG"

    def test_repeat_renders_byte_identical(self, tmp_path):
        sets = {"a": {"1", "3"}, "b": {"2", "3"}}
        unique, solved = write_fixture(tmp_path, "duo", sets)
        one = plot_contributions(unique, solved, tmp_path / "one.svg")
        two = plot_contributions(unique, solved, tmp_path / "two.svg")
        assert one.read_bytes() == two.read_bytes()


class TestCli:
    def test_missing_argument_is_usage_error(self, capsys):
        assert contributions_main(["only_one.csv"]) == 1
        assert "usage error" in capsys.readouterr().err

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        rc = contributions_main(
            [
                str(tmp_path / "unique.csv"),
                str(tmp_path / "solved.csv"),
                str(tmp_path / "out.svg"),
            ]
        )
        assert rc == 2
        assert "io error" in capsys.readouterr().err

    def test_success(self, tmp_path):
        sets = {"a": {"1"}, "b": {"1"}}
        unique, solved = write_fixture(tmp_path, "duo", sets)
        out = tmp_path / "out.svg"
        assert contributions_main([str(unique), str(solved), str(out)]) == 0
        assert out.exists()
