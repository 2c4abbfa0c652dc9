import json

import pytest
from openpyxl import Workbook

from core.errors import ManifestError
from core.manifest import REQUIREMENTS, ManifestLoader, ManifestValidator


@pytest.fixture
def loader():
    return ManifestLoader()


def write_json(path, document):
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


class TestValidator:
    def test_accepts_minimal_cases(self):
        result = ManifestValidator().validate(
            [
                {"name": "a", "command": "exponent", "n": 2, "lambda": 1, "Lambda": 4},
                {"name": "b", "command": "exponent", "sweep": "n=2..3,ratio=0.5..1x2"},
                {"name": "c", "command": "monotonicity", "field": "identity", "boundary": "cos(theta)"},
            ]
        )
        assert result.is_valid
        assert result.errors == [] and result.warnings == []

    def test_reports_every_problem_with_case_number(self):
        result = ManifestValidator().validate(
            [
                {"name": "a", "command": "launch"},
                {"name": "b", "command": "pohozaev", "field": "identity"},
                {"name": "c", "command": "poincare", "solution": "affine", "boundary": "x1"},
                {"name": "c", "command": "naive", "n": 2.5},
            ]
        )
        assert not result.is_valid
        assert len(result.errors) == 5
        assert result.errors[0].startswith("Кейс 1:")
        assert any("Кейс 4" in error and "уже встречалось" in error for error in result.errors)

    def test_numeric_keys_are_typed(self):
        errors = ManifestValidator().validate_case(
            {"command": "optimize", "n": "three", "lambda": "1", "Lambda": True}
        )
        assert len(errors) == 2

    def test_batch_cases(self):
        validator = ManifestValidator()
        assert validator.validate_case({"command": "exponent", "count": 100, "seed": 1}) == []
        assert validator.validate_case({"command": "optimize", "count": 50}) == []
        assert validator.validate_case(
            {"command": "poincare", "solution": "random:n=2,k=3", "count": 20}
        ) == []
        assert any("count" in e for e in validator.validate_case({"command": "exponent", "count": 0}))
        mixed = validator.validate_case({"command": "exponent", "sweep": "n=2..3,ratio=0.5..1x2", "count": 3})
        assert mixed == ["count и sweep взаимоисключающие"]

    def test_unknown_keys_are_warnings(self):
        result = ManifestValidator().validate([{"command": "naive", "n": 7, "colour": "red"}])
        assert result.is_valid
        assert "colour" in result.warnings[0]

    def test_every_command_has_requirements(self):
        assert set(REQUIREMENTS) == {
            "exponent",
            "optimize",
            "pohozaev",
            "monotonicity",
            "convergence",
            "poincare",
            "naive",
        }


class TestLoader:
    def test_json_document_with_schema(self, loader, tmp_path):
        path = write_json(
            tmp_path / "suite.json",
            {"schema": "1", "cases": [{"command": "naive", "n": 7}, {"command": "naive", "n": 12}]},
        )
        cases = loader.load(str(path))
        assert [case["name"] for case in cases] == ["naive-1", "naive-2"]

    def test_bare_list_and_explicit_names(self, loader, tmp_path):
        path = write_json(tmp_path / "list.json", [{"name": "mine", "command": "naive", "n": 3}])
        assert loader.load(str(path))[0]["name"] == "mine"

    def test_unsupported_schema(self, loader, tmp_path):
        path = write_json(tmp_path / "old.json", {"schema": "0", "cases": []})
        with pytest.raises(ManifestError):
            loader.load(str(path))

    def test_malformed_documents(self, loader, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        with pytest.raises(ManifestError):
            loader.load(str(broken))
        with pytest.raises(ManifestError):
            loader.load(str(write_json(tmp_path / "scalars.json", [1, 2])))
        text = tmp_path / "suite.txt"
        text.write_text("[]", encoding="utf-8")
        with pytest.raises(ManifestError):
            loader.load(str(text))

    def test_missing_manifest(self, loader):
        with pytest.raises(ManifestError):
            loader.load("no-such-manifest")

    def test_invalid_cases_raise_with_all_errors(self, loader, tmp_path):
        path = write_json(tmp_path / "bad.json", [{"command": "launch"}, {"command": "naive"}])
        with pytest.raises(ManifestError) as caught:
            loader.load(str(path))
        assert "Кейс 1" in str(caught.value) and "Кейс 2" in str(caught.value)

    def test_xlsx_manifest(self, loader, tmp_path):
        wb = Workbook()
        ws = wb.active
        ws.append(["name", "command", "n", "lambda", "Lambda", "field", "solution"])
        ws.append(["exp", "exponent", 2, 1.0, 4.0, None, None])
        ws.append([None, "pohozaev", None, None, None, " identity ", "affine"])
        ws.append([None, None, None, None, None, None, None])
        path = tmp_path / "suite.xlsx"
        wb.save(path)

        cases = loader.load(str(path))
        assert len(cases) == 2
        assert cases[0] == {"name": "exp", "command": "exponent", "n": 2, "lambda": 1.0, "Lambda": 4.0}
        assert cases[1]["field"] == "identity"
        assert cases[1]["name"] == "pohozaev-2"
        assert "n" not in cases[1]

    def test_bundled_paper_suite(self, loader):
        cases = loader.load("paper-suite")
        names = [case["name"] for case in cases]
        assert len(names) == len(set(names))
        commands = {case["command"] for case in cases}
        assert commands == set(REQUIREMENTS)
        batches = {case["name"]: case["count"] for case in cases if "count" in case}
        assert batches["exponent-random-2d"] == 100
        assert batches["optimize-random"] == 50
        assert batches["monotonicity-random-constant"] == 10
        assert batches["poincare-random-2d"] == 20
        harmonic = [case for case in cases if case["name"].startswith("pohozaev-harmonic-")]
        assert len(harmonic) == 21
