/**
 * Minimal RGB raster surface: pixels, lines, rectangles, markers and
 * bitmap-font text.  Coordinates are pixel-based with the origin at the
 * top-left corner.
 */

import { GLYPH_HEIGHT, GLYPH_WIDTH, glyphFor } from "./font.js";

export type Rgb = [number, number, number];

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Rgb = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3);
    for (let i = 0; i < width * height; i++) {
      this.data[3 * i] = background[0];
      this.data[3 * i + 1] = background[1];
      this.data[3 * i + 2] = background[2];
    }
  }

  set(x: number, y: number, color: Rgb): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = 3 * (y * this.width + x);
    this.data[i] = color[0];
    this.data[i + 1] = color[1];
    this.data[i + 2] = color[2];
  }

  /** Bresenham line with optional thickness. */
  line(x0: number, y0: number, x1: number, y1: number, color: Rgb, thick = 1): void {
    let ix0 = Math.round(x0);
    let iy0 = Math.round(y0);
    const ix1 = Math.round(x1);
    const iy1 = Math.round(y1);
    const dx = Math.abs(ix1 - ix0);
    const dy = -Math.abs(iy1 - iy0);
    const sx = ix0 < ix1 ? 1 : -1;
    const sy = iy0 < iy1 ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.dot(ix0, iy0, color, thick);
      if (ix0 === ix1 && iy0 === iy1) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        ix0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        iy0 += sy;
      }
    }
  }

  dot(x: number, y: number, color: Rgb, size = 1): void {
    const r = Math.floor(size / 2);
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        this.set(x + dx, y + dy, color);
      }
    }
  }

  marker(x: number, y: number, color: Rgb, size = 5): void {
    this.dot(x, y, color, size);
  }

  rect(x0: number, y0: number, x1: number, y1: number, color: Rgb): void {
    this.line(x0, y0, x1, y0, color);
    this.line(x1, y0, x1, y1, color);
    this.line(x1, y1, x0, y1, color);
    this.line(x0, y1, x0, y0, color);
  }

  fillRect(x0: number, y0: number, x1: number, y1: number, color: Rgb): void {
    for (let y = Math.round(y0); y <= Math.round(y1); y++) {
      for (let x = Math.round(x0); x <= Math.round(x1); x++) {
        this.set(x, y, color);
      }
    }
  }

  text(x: number, y: number, content: string, color: Rgb, scale = 1): void {
    let cx = Math.round(x);
    const cy = Math.round(y);
    for (const ch of content) {
      const rows = glyphFor(ch);
      for (let r = 0; r < GLYPH_HEIGHT; r++) {
        for (let c = 0; c < GLYPH_WIDTH; c++) {
          if ((rows[r] >> (GLYPH_WIDTH - 1 - c)) & 1) {
            this.fillRect(
              cx + c * scale,
              cy + r * scale,
              cx + (c + 1) * scale - 1,
              cy + (r + 1) * scale - 1,
              color,
            );
          }
        }
      }
      cx += (GLYPH_WIDTH + 1) * scale;
    }
  }

  /** Text centered horizontally around x. */
  textCentered(x: number, y: number, content: string, color: Rgb, scale = 1): void {
    const w = content.length * (GLYPH_WIDTH + 1) * scale;
    this.text(x - w / 2, y, content, color, scale);
  }
}
