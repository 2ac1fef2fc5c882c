"""Validates every sample document against its published JSON schema.

usage: validate_samples.py <schema-dir> <sample-dir>

Samples live in <sample-dir>/<name>/*.json and are checked against
<schema-dir>/<name>.schema.json. Secrets planted by the sample run must not
appear in any document.
"""

import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource

PLANTED_SECRET = "hunter2"


def main() -> int:
    schema_dir = pathlib.Path(sys.argv[1])
    sample_dir = pathlib.Path(sys.argv[2])
    schemas = {p.name: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(doc)) for name, doc in schemas.items())

    failures = 0
    checked = 0
    seen = set()
    for group in sorted(p for p in sample_dir.iterdir() if p.is_dir()):
        schema_name = f"{group.name}.schema.json"
        if schema_name not in schemas:
            print(f"no schema for sample group {group.name}")
            failures += 1
            continue
        seen.add(schema_name)
        validator = jsonschema.Draft202012Validator(
            schemas[schema_name], registry=registry,
            format_checker=jsonschema.Draft202012Validator.FORMAT_CHECKER)
        for sample in sorted(group.glob("*.json")):
            text = sample.read_text()
            checked += 1
            if PLANTED_SECRET in text:
                print(f"{sample}: leaks a credential")
                failures += 1
            for error in validator.iter_errors(json.loads(text)):
                print(f"{sample}: {error.json_path}: {error.message}")
                failures += 1

    unused = sorted(set(schemas) - seen - {"error_notice.schema.json"})
    for name in unused:
        print(f"no samples exercised {name}")
        failures += 1
    print(f"{checked} samples, {len(seen)} schemas, {failures} failures")
    return 1 if failures or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
