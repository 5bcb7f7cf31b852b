/**
 * padx-bindings: call the augmentation engine from Node/TypeScript.
 *
 * Two operations are exposed, mirroring the engine's contracts exactly:
 *  - {@link boundBlend}: Poisson-blend one in-memory patch into a target;
 *  - {@link boundAugment}: run the full tail-class augmentation pass over an
 *    annotation file and image directory.
 *
 * Outputs are bit-identical to direct engine CLI runs with the same inputs
 * and seeds; engine errors surface as {@link EngineError} with the engine's
 * own message.
 */

import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { BoundImage } from "./image.js";
import { EngineError, engineVersion, runEngine } from "./engine.js";

export { BoundImage } from "./image.js";
export { EngineError, engineVersion } from "./engine.js";
export { decodePng, encodePng } from "./png.js";

/** Matches the engine package version; parity is asserted in tests. */
export const VERSION = "0.1.0";

export interface BlendOptions {
  /** Source-to-target pixel offset. */
  offset: { dx: number; dy: number };
  /**
   * Region mask, 1-channel, same size as the source; samples >= 128 mark
   * region pixels. Omitted: the full source rectangle.
   */
  mask?: BoundImage;
}

export interface AugmentConfig {
  tailThreshold?: number;
  copiesPerInstance?: number;
  complexityWeight?: number;
  seed?: number;
  minPatch?: number;
  hostSampleAttempts?: number;
  jobs?: number;
}

export interface AugmentClassReport {
  seen: number;
  generated: number;
  skipped: Record<string, number>;
}

export interface AugmentReport {
  tail_classes: number[];
  per_class: Record<string, AugmentClassReport>;
  total_generated: number;
  warning: string | null;
}

const CONFIG_FLAGS: Record<keyof AugmentConfig, string> = {
  tailThreshold: "--tail-threshold",
  copiesPerInstance: "--copies",
  complexityWeight: "--complexity-weight",
  seed: "--seed",
  minPatch: "--min-patch",
  hostSampleAttempts: "--attempts",
  jobs: "--jobs",
};

/**
 * Blend `source` into `target` at the given offset. The returned image wraps
 * freshly decoded engine output (one unavoidable copy across the process
 * boundary; no further copies are made).
 */
export function boundBlend(
  target: BoundImage,
  source: BoundImage,
  opts: BlendOptions,
): BoundImage {
  if (opts.mask && opts.mask.channels !== 1) {
    throw new Error(`mask must be 1-channel, got ${opts.mask.channels}`);
  }
  const dir = mkdtempSync(join(tmpdir(), "padx-blend-"));
  try {
    const targetPath = join(dir, "target.png");
    const sourcePath = join(dir, "source.png");
    const outPath = join(dir, "out.png");
    writeFileSync(targetPath, target.encode());
    writeFileSync(sourcePath, source.encode());
    const args = [
      "blend",
      "--target", targetPath,
      "--source", sourcePath,
      "--offset", String(opts.offset.dx), String(opts.offset.dy),
      "--out", outPath,
    ];
    if (opts.mask) {
      const maskPath = join(dir, "mask.png");
      writeFileSync(maskPath, opts.mask.encode());
      args.push("--mask", maskPath);
    }
    runEngine(args);
    return BoundImage.decode(readFileSync(outPath));
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/**
 * Run the augmentation pass: composites, augmented annotations, and a report
 * are written under `outDir` exactly as the engine CLI would; the parsed
 * report is returned.
 */
export function boundAugment(
  annotationsPath: string,
  imageDir: string,
  outDir: string,
  config: AugmentConfig = {},
): AugmentReport {
  const args = [
    "augment", annotationsPath,
    "--images", imageDir,
    "--out", outDir,
    "--format", "json",
  ];
  for (const [key, value] of Object.entries(config)) {
    const flag = CONFIG_FLAGS[key as keyof AugmentConfig];
    if (flag === undefined) {
      throw new Error(`unknown augment config key '${key}'`);
    }
    if (value !== undefined) {
      args.push(flag, String(value));
    }
  }
  return JSON.parse(runEngine(args)) as AugmentReport;
}
