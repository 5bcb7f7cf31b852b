/**
 * Minimal PNG codec for the engine's raster format: 8-bit grayscale or RGB,
 * no interlacing, no alpha. Decoding handles all five scanline filters (the
 * engine's encoder picks adaptively); encoding always emits filter 0.
 */

import { deflateSync, inflateSync } from "node:zlib";

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

export interface RawImage {
  width: number;
  height: number;
  channels: 1 | 3;
  /** Row-major interleaved samples, length = width * height * channels. */
  data: Uint8Array;
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(...chunks: Uint8Array[]): number {
  let c = 0xffffffff;
  for (const chunk of chunks) {
    for (let i = 0; i < chunk.length; i++) {
      c = CRC_TABLE[(c ^ chunk[i]) & 0xff] ^ (c >>> 8);
    }
  }
  return (c ^ 0xffffffff) >>> 0;
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

export function decodePng(file: Uint8Array): RawImage {
  const buf = Buffer.from(file.buffer, file.byteOffset, file.byteLength);
  if (buf.length < 8 || !buf.subarray(0, 8).equals(SIGNATURE)) {
    throw new Error("not a PNG file (bad signature)");
  }

  let width = 0;
  let height = 0;
  let channels: 1 | 3 = 3;
  const idat: Buffer[] = [];
  let sawIhdr = false;
  let offset = 8;

  while (offset + 8 <= buf.length) {
    const length = buf.readUInt32BE(offset);
    const type = buf.toString("latin1", offset + 4, offset + 8);
    const body = buf.subarray(offset + 8, offset + 8 + length);
    offset += 12 + length;

    if (type === "IHDR") {
      sawIhdr = true;
      width = body.readUInt32BE(0);
      height = body.readUInt32BE(4);
      const bitDepth = body[8];
      const colorType = body[9];
      const interlace = body[12];
      if (bitDepth !== 8) {
        throw new Error(`unsupported PNG bit depth ${bitDepth} (need 8)`);
      }
      if (colorType === 0) channels = 1;
      else if (colorType === 2) channels = 3;
      else throw new Error(`unsupported PNG color type ${colorType} (need gray or RGB)`);
      if (interlace !== 0) throw new Error("interlaced PNG is not supported");
    } else if (type === "IDAT") {
      idat.push(body);
    } else if (type === "IEND") {
      break;
    }
    // ancillary chunks are skipped
  }
  if (!sawIhdr || width === 0 || height === 0) {
    throw new Error("malformed PNG: missing or empty IHDR");
  }

  const raw = inflateSync(Buffer.concat(idat));
  const stride = width * channels;
  if (raw.length !== (stride + 1) * height) {
    throw new Error("malformed PNG: unexpected raster size");
  }

  const out = new Uint8Array(stride * height);
  let prev = new Uint8Array(stride); // zero row above the first scanline
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const line = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    const cur = out.subarray(y * stride, (y + 1) * stride);
    for (let x = 0; x < stride; x++) {
      const left = x >= channels ? cur[x - channels] : 0;
      const up = prev[x];
      const upLeft = x >= channels ? prev[x - channels] : 0;
      let value: number;
      switch (filter) {
        case 0: value = line[x]; break;
        case 1: value = line[x] + left; break;
        case 2: value = line[x] + up; break;
        case 3: value = line[x] + ((left + up) >> 1); break;
        case 4: value = line[x] + paeth(left, up, upLeft); break;
        default: throw new Error(`malformed PNG: unknown filter ${filter}`);
      }
      cur[x] = value & 0xff;
    }
    prev = cur;
  }
  return { width, height, channels, data: out };
}

function chunk(type: string, body: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(body.length, 0);
  head.write(type, 4, "latin1");
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(head.subarray(4), body), 0);
  return Buffer.concat([head, body, crc]);
}

export function encodePng(img: RawImage): Buffer {
  const { width, height, channels, data } = img;
  if (width < 1 || height < 1) throw new Error("image must be at least 1x1");
  const stride = width * channels;
  if (data.length !== stride * height) {
    throw new Error(
      `pixel buffer length ${data.length} does not match ${width}x${height}x${channels}`,
    );
  }
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = channels === 1 ? 0 : 2;
  // compression, filter, interlace all zero

  const raster = Buffer.alloc((stride + 1) * height);
  for (let y = 0; y < height; y++) {
    raster[y * (stride + 1)] = 0; // filter: none
    raster.set(data.subarray(y * stride, (y + 1) * stride), y * (stride + 1) + 1);
  }

  return Buffer.concat([
    SIGNATURE,
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raster)),
    chunk("IEND", new Uint8Array(0)),
  ]);
}
