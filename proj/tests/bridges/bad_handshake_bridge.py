#!/usr/bin/env python3
"""Bridge whose first line is not a valid handshake."""
print('{"hello": "world"}', flush=True)
import sys
for line in sys.stdin:
    pass
