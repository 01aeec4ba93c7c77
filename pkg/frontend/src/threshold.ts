// Client-side silhouette extraction: plain intensity threshold.
// Morphological cleanup happens server-side so the numerics live in one
// implementation; the mask uploaded is exactly the previewed one.

export interface GrayImage {
  width: number;
  height: number;
  data: Uint8ClampedArray; // RGBA, as from ImageData
}

export type BinaryMask = {
  width: number;
  height: number;
  bits: Uint8Array; // 1 = object
};

export interface ThresholdParams {
  level: number; // 0..256; pixels with luminance >= level are object
  invert: boolean; // flip polarity for dark-hulled imagery
}

export function luminance(r: number, g: number, b: number): number {
  // integer Rec.601 approximation, 0..255
  return (r * 77 + g * 150 + b * 29) >> 8;
}

export function binarize(image: GrayImage, params: ThresholdParams): BinaryMask {
  const level = Math.max(0, Math.min(256, Math.floor(params.level)));
  const bits = new Uint8Array(image.width * image.height);
  const d = image.data;
  for (let p = 0, i = 0; p < bits.length; p++, i += 4) {
    const bright = luminance(d[i], d[i + 1], d[i + 2]) >= level;
    bits[p] = bright !== params.invert ? 1 : 0;
  }
  return { width: image.width, height: image.height, bits };
}

export function objectPixelCount(mask: BinaryMask): number {
  let n = 0;
  for (let i = 0; i < mask.bits.length; i++) n += mask.bits[i];
  return n;
}

/** Mask as RGBA bytes (white object on black), for preview and upload. */
export function maskToRgba(mask: BinaryMask): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(mask.bits.length * 4);
  for (let p = 0; p < mask.bits.length; p++) {
    const v = mask.bits[p] ? 255 : 0;
    out[p * 4] = v;
    out[p * 4 + 1] = v;
    out[p * 4 + 2] = v;
    out[p * 4 + 3] = 255;
  }
  return out;
}
