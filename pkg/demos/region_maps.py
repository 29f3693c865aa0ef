"""Write the (p, q) region diagrams for the free and slow-potential cases as SVG files."""

import sys
from pathlib import Path

from choquard.regimes import PotentialSpec as V, emit_region_diagram, region_scan

out = Path(sys.argv[1] if len(sys.argv) > 1 else "region_maps")
out.mkdir(exist_ok=True)
MAPS = {
    "free_large_alpha": (4, 3, V.zero()),
    "free_small_alpha": (5, 1, V.zero()),
    "slow_gamma_1.5": (3, 2, V.slow(1, 1.5)),
    "slow_gamma_0": (3, 2, V.slow(1, 0)),
    "slow_gamma_-4": (3, 2, V.slow(1, -4)),
}
for name, (N, a, pot) in MAPS.items():
    rmap = region_scan(N, a, pot, (0.0, 6.0), (-1.0, 3.0), 200)
    emit_region_diagram(rmap, "svg", out / f"{name}.svg")
    off = rmap.boundary_offsets()
    print(f"{name:18s} regions: {', '.join(rmap.legend())}; max boundary offset {off.max():.2f} cells")
print(f"written to {out}/")
