/**
 * Process bridge to the augmentation engine.
 *
 * The engine is consumed strictly through its public surfaces: the `padx`
 * command line and its documented file formats (PNG rasters, COCO-subset
 * annotation JSON, report JSON). Engine errors (exit code 2) are re-thrown
 * as EngineError carrying the engine's own message, 1:1.
 */

import { spawnSync } from "node:child_process";

export class EngineError extends Error {
  constructor(message: string, readonly exitCode: number) {
    super(message);
    this.name = "EngineError";
  }
}

/** Engine launcher: `PADX_BIN` overrides the default `padx` on PATH. */
export function engineCommand(): string[] {
  const bin = process.env.PADX_BIN;
  if (bin && bin.trim().length > 0) {
    return bin.trim().split(/\s+/);
  }
  return ["padx"];
}

export function runEngine(args: string[]): string {
  const [cmd, ...pre] = engineCommand();
  const proc = spawnSync(cmd, [...pre, ...args], {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (proc.error) {
    throw new EngineError(
      `cannot launch augmentation engine '${cmd}': ${proc.error.message} ` +
      "(install the engine or set PADX_BIN)",
      -1,
    );
  }
  if (proc.status !== 0) {
    throw new EngineError(extractMessage(proc.stderr), proc.status ?? -1);
  }
  return proc.stdout;
}

/** Pull the engine's own message out of its stderr stream. */
function extractMessage(stderr: string): string {
  const lines = stderr.trim().split("\n").filter((l) => l.length > 0);
  for (const line of lines) {
    if (line.startsWith("error: ")) {
      return line.slice("error: ".length);
    }
  }
  return lines.at(-1) ?? "engine failed without a message";
}

export function engineVersion(): string {
  return runEngine(["--version"]).trim();
}
