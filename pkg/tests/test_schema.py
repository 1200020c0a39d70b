import json
from pathlib import Path

import jsonschema
import pytest

from sympslice.cli import main

DOCS = Path(__file__).resolve().parent.parent / "docs"


@pytest.fixture(scope="module")
def report_schema():
    return json.loads((DOCS / "slice-report.schema.json").read_text())


@pytest.fixture(scope="module")
def list_schema():
    return json.loads((DOCS / "system-list.schema.json").read_text())


def test_describe_reports_validate(capsys, report_schema):
    configs = [
        ["describe", "--system", "so3_r3", "--point", "0", "0", "1",
         "--covector", "0", "-1", "0"],
        ["describe", "--system", "so3_two_body",
         "--point", "0", "0", "1", "0", "0", "0",
         "--eta", "1", "0", "0", "--s", "0", "0", "0.3", "0.2", "0.5", "0.1"],
        ["describe", "--system", "torus2_r4", "--point", "1", "0", "0", "0",
         "--covector", "0", "1", "0", "0"],
        ["describe", "--system", "so3_on_so3", "--point", "0", "0", "0",
         "--covector", "0.7", "0.2", "0.5"],
    ]
    for argv in configs:
        assert main(argv) == 0
        report = json.loads(capsys.readouterr().out)
        jsonschema.validate(report, report_schema)


def test_list_json_validates(capsys, list_schema):
    assert main(["list", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    jsonschema.validate(payload, list_schema)
    assert {d["key"] for d in payload} >= {"so3_r3", "so3_two_body", "torus2_r4", "so3_on_so3"}
