#!/usr/bin/env python3
"""Bridge that handshakes correctly, then emits a garbage response line."""
import json
import sys

print(json.dumps({"fex_bridge": 1, "n_features": 2, "n_classes": 2}), flush=True)
for line in sys.stdin:
    print("this is not json", flush=True)
