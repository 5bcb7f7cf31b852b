import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import { BoundImage } from "../src/image.js";
import { decodePng, encodePng } from "../src/png.js";

const tmp = mkdtempSync(join(tmpdir(), "padx-png-test-"));
afterAll(() => rmSync(tmp, { recursive: true, force: true }));

function randomPixels(n: number, seed: number): Uint8Array {
  // deterministic LCG so fixtures are stable
  const out = new Uint8Array(n);
  let state = seed >>> 0;
  for (let i = 0; i < n; i++) {
    state = (state * 1664525 + 1013904223) >>> 0;
    out[i] = state >>> 24;
  }
  return out;
}

describe("png codec", () => {
  it("round-trips RGB through our own encoder/decoder", () => {
    const img = BoundImage.fromPixels(13, 7, 3, randomPixels(13 * 7 * 3, 1));
    const back = BoundImage.decode(img.encode());
    expect(back.equals(img)).toBe(true);
  });

  it("round-trips grayscale", () => {
    const img = BoundImage.fromPixels(9, 11, 1, randomPixels(99, 2));
    expect(BoundImage.decode(img.encode()).equals(img)).toBe(true);
  });

  it("decodes engine-written PNGs (all scanline filters)", () => {
    // the engine's encoder filters adaptively, which exercises the
    // Sub/Up/Average/Paeth paths our decoder must invert
    const img = BoundImage.fromPixels(32, 24, 3, randomPixels(32 * 24 * 3, 3));
    const ours = join(tmp, "ours.png");
    const theirs = join(tmp, "theirs.png");
    writeFileSync(ours, img.encode());
    execFileSync("python3", ["-c", `
from PIL import Image
Image.open(${JSON.stringify(ours)}).save(${JSON.stringify(theirs)}, format="PNG")
`]);
    const back = BoundImage.decode(readFileSync(theirs));
    expect(back.equals(img)).toBe(true);
  });

  it("rejects non-PNG bytes", () => {
    expect(() => decodePng(new Uint8Array([1, 2, 3]))).toThrow(/signature/);
  });

  it("rejects unsupported color types", () => {
    const img = BoundImage.fromPixels(4, 4, 3, randomPixels(48, 4));
    const rgbaPath = join(tmp, "rgba.png");
    execFileSync("python3", ["-c", `
from PIL import Image
Image.new("RGBA", (4, 4), (1, 2, 3, 4)).save(${JSON.stringify(rgbaPath)})
`]);
    expect(() => decodePng(readFileSync(rgbaPath))).toThrow(/color type/);
    void img;
  });

  it("validates buffer length against dimensions", () => {
    expect(() => encodePng({ width: 4, height: 4, channels: 3, data: new Uint8Array(5) }))
      .toThrow(/does not match/);
    expect(() => BoundImage.fromPixels(4, 4, 3, new Uint8Array(5))).toThrow(/does not match/);
  });

  it("data view is zero-copy", () => {
    const raw = randomPixels(27, 5);
    const img = BoundImage.fromPixels(3, 3, 3, raw);
    raw[0] = (raw[0] + 1) & 0xff;
    expect(img.data[0]).toBe(raw[0]);
    const copied = BoundImage.fromPixels(3, 3, 3, raw, { copy: true });
    raw[1] = (raw[1] + 1) & 0xff;
    expect(copied.data[1]).not.toBe(raw[1]);
  });
});
