"""Regenerate the bundled per-machine sentence caches.

    python3 scripts/build_caches.py
"""

from importlib import resources
from pathlib import Path

from finsat.fragments import write_cache_file
from finsat.reduction import parse_tm

machines = sorted(resources.files("finsat").joinpath("machines").iterdir(), key=lambda p: p.name)
parsed = [parse_tm(p.read_text()) for p in machines if p.name.endswith(".tm")]
out = Path(__file__).resolve().parent.parent / "src" / "finsat" / "data" / "implication-free.cache"
entries = write_cache_file(out, parsed)
print(f"wrote {len(entries)} entries to {out}")
