#!/usr/bin/env python3
"""Regenerate the committed blend fixture (tests/data/blend).

The golden composite comes from the dense direct solver, not the CG path,
so the fixture is an independent check of the production pipeline. The
script refuses to write a fixture on which CG (whichever kernel backend is
active) and the dense oracle disagree after 8-bit quantization, which would
make the golden comparison flaky.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from padx.core import BinaryMask, ImageBuffer
from padx.imgio import write_png
from padx.poisson import BlendProblem, blend, build_system, dense_solve_oracle

SEED = 77


def main(out_root: Path) -> None:
    out_root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)

    # Smooth target with a gradient plus mild texture; busy source patch.
    yy, xx = np.mgrid[0:48, 0:48].astype(np.float64)
    base = np.stack([120 + xx * 1.5, 90 + yy * 1.2, 160 - xx * 0.8], axis=2)
    target = ImageBuffer(np.clip(base + rng.normal(0, 5, (48, 48, 3)), 0, 255).astype(np.uint8))
    source = ImageBuffer(rng.integers(30, 220, (12, 16, 3), dtype=np.uint8))

    problem = BlendProblem(
        target=target, source=source,
        mask=BinaryMask.full(16, 12), offset=(17, 21),
    )

    system = build_system(problem)
    dense = dense_solve_oracle(system)
    golden_px = target.pixels.copy()
    golden_px[system.ys + 21, system.xs + 17] = \
        np.rint(np.clip(dense, 0.0, 255.0)).astype(np.uint8)
    golden = ImageBuffer(golden_px)

    via_cg = blend(problem)
    if via_cg != golden:
        raise SystemExit("CG and dense composites disagree after quantization; "
                         "pick a different seed")

    write_png(target, out_root / "target.png")
    write_png(source, out_root / "source.png")
    write_png(golden, out_root / "golden.png")
    print(f"wrote blend fixture to {out_root} (region 16x12 at offset (17, 21))")


if __name__ == "__main__":
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/data/blend")
    main(root)
