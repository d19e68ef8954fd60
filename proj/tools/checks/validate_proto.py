#!/usr/bin/env python3
# Copyright 2026 The Shuttle Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Validates golden protocol messages against the shipped JSON Schema.
import glob
import json
import os
import sys

import jsonschema

root = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "..")
schema = json.load(open(os.path.join(root, "proto", "shuttle-proto-1.schema.json")))
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)

goldens = sorted(glob.glob(os.path.join(root, "tests", "golden", "proto", "*.json")))
types = set(schema["$defs"]) - {"player", "controller", "seats", "zone", "action", "score"}
seen = set()
failed = 0
for path in goldens:
    msg = json.load(open(path))
    seen.add(msg.get("type"))
    errors = list(validator.iter_errors(msg))
    if errors:
        failed += 1
        print(f"FAIL {os.path.basename(path)}: {errors[0].message}")
missing = types - seen
if missing:
    failed += 1
    print("FAIL no golden for: " + ", ".join(sorted(missing)))
print(f"{len(goldens)} goldens checked, {failed} failures")
sys.exit(1 if failed else 0)
