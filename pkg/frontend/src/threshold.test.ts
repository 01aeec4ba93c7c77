import { describe, expect, it } from 'vitest';

import { binarize, luminance, maskToRgba, objectPixelCount, type GrayImage } from './threshold';

function grayRamp(width = 16, height = 16): GrayImage {
  // deterministic mixed-intensity image
  const data = new Uint8ClampedArray(width * height * 4);
  for (let p = 0; p < width * height; p++) {
    const v = (p * 37) % 256;
    data[p * 4] = v;
    data[p * 4 + 1] = v;
    data[p * 4 + 2] = v;
    data[p * 4 + 3] = 255;
  }
  return { width, height, data };
}

describe('binarize', () => {
  it('threshold 0 marks everything as object', () => {
    const mask = binarize(grayRamp(), { level: 0, invert: false });
    expect(objectPixelCount(mask)).toBe(256);
  });

  it('threshold max marks everything as background', () => {
    const mask = binarize(grayRamp(), { level: 256, invert: false });
    expect(objectPixelCount(mask)).toBe(0);
  });

  it('mid threshold matches an offline pixel-count oracle', () => {
    const img = grayRamp();
    const level = 128;
    let expected = 0;
    for (let p = 0; p < img.width * img.height; p++) {
      const v = img.data[p * 4];
      if (luminance(v, v, v) >= level) expected++;
    }
    const mask = binarize(img, { level, invert: false });
    expect(objectPixelCount(mask)).toBe(expected);
    expect(expected).toBeGreaterThan(0);
    expect(expected).toBeLessThan(256);
  });

  it('invert flips polarity exactly', () => {
    const img = grayRamp();
    const a = binarize(img, { level: 100, invert: false });
    const b = binarize(img, { level: 100, invert: true });
    for (let p = 0; p < a.bits.length; p++) {
      expect(a.bits[p] + b.bits[p]).toBe(1);
    }
  });

  it('uses weighted luminance for color pixels', () => {
    const data = new Uint8ClampedArray([0, 255, 0, 255]); // pure green
    const img: GrayImage = { width: 1, height: 1, data };
    // green weight 150/256 of 255 ~ 149
    expect(binarize(img, { level: 149, invert: false }).bits[0]).toBe(1);
    expect(binarize(img, { level: 150, invert: false }).bits[0]).toBe(0);
  });
});

describe('maskToRgba', () => {
  it('renders object white on black, opaque', () => {
    const mask = { width: 2, height: 1, bits: new Uint8Array([1, 0]) };
    const rgba = maskToRgba(mask);
    expect([...rgba]).toEqual([255, 255, 255, 255, 0, 0, 0, 255]);
  });
});
