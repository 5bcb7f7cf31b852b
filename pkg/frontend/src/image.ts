/**
 * In-memory raster exchanged with the engine: 8-bit samples, row-major,
 * 1 (gray) or 3 (RGB) interleaved channels.
 */

import { decodePng, encodePng, RawImage } from "./png.js";

export class BoundImage {
  readonly width: number;
  readonly height: number;
  readonly channels: 1 | 3;
  /**
   * Contiguous sample buffer, length = width * height * channels.
   * This is a zero-copy view of the buffer the image was constructed from
   * (or of the decoder output); mutate it and the image changes too. Use
   * {@link BoundImage.fromPixels} with `copy: true` for a defensive copy.
   */
  readonly data: Uint8Array;

  private constructor(width: number, height: number, channels: 1 | 3, data: Uint8Array) {
    if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
      throw new Error(`image must be at least 1x1, got ${width}x${height}`);
    }
    if (channels !== 1 && channels !== 3) {
      throw new Error(`channels must be 1 or 3, got ${channels}`);
    }
    if (data.length !== width * height * channels) {
      throw new Error(
        `pixel buffer length ${data.length} does not match ` +
        `${width}x${height}x${channels} = ${width * height * channels}`,
      );
    }
    this.width = width;
    this.height = height;
    this.channels = channels;
    this.data = data;
  }

  static fromPixels(
    width: number,
    height: number,
    channels: 1 | 3,
    data: Uint8Array,
    opts: { copy?: boolean } = {},
  ): BoundImage {
    const buf = opts.copy ? Uint8Array.from(data) : data;
    return new BoundImage(width, height, channels, buf);
  }

  static decode(png: Uint8Array): BoundImage {
    const raw: RawImage = decodePng(png);
    return new BoundImage(raw.width, raw.height, raw.channels, raw.data);
  }

  encode(): Buffer {
    return encodePng(this);
  }

  /** Sample at (x, y); channel defaults to 0. */
  at(x: number, y: number, channel = 0): number {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height || channel >= this.channels) {
      throw new Error(`pixel (${x}, ${y})[${channel}] outside ${this.width}x${this.height}x${this.channels}`);
    }
    return this.data[(y * this.width + x) * this.channels + channel];
  }

  equals(other: BoundImage): boolean {
    return (
      this.width === other.width &&
      this.height === other.height &&
      this.channels === other.channels &&
      Buffer.compare(this.data, other.data) === 0
    );
  }
}
