"""Internal thread budget, capped by the BANDSEL_THREADS environment variable."""

from __future__ import annotations

import os


def thread_budget() -> int:
    cap = os.cpu_count() or 1
    raw = os.environ.get("BANDSEL_THREADS", "").strip()
    if raw:
        try:
            cap = min(cap, max(1, int(raw)))
        except ValueError:
            pass
    return cap
