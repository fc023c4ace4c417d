// Binary PPM (P6) decoding for the frame payloads.

export interface RgbaImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
}

export function base64ToBytes(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0c || byte === 0x0b;
}

/** Decode a binary PPM buffer into RGBA pixels (alpha = 255). */
export function decodePpm(bytes: Uint8Array): RgbaImage {
  if (bytes.length < 2 || bytes[0] !== 0x50 || bytes[1] !== 0x36) {
    throw new Error("not a P6 PPM buffer");
  }
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    while (pos < bytes.length && isSpace(bytes[pos])) pos++;
    if (bytes[pos] === 0x23) {
      // comment line
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
      continue;
    }
    let value = 0;
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos])) {
      value = value * 10 + (bytes[pos] - 0x30);
      pos++;
    }
    if (pos === start) throw new Error("truncated PPM header");
    fields.push(value);
  }
  pos++; // single whitespace after maxval
  const [width, height, maxval] = fields;
  if (maxval !== 255) throw new Error(`unsupported maxval ${maxval}`);
  const need = width * height * 3;
  if (bytes.length - pos < need) throw new Error("truncated PPM payload");
  const rgba = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  for (let i = 0, j = 0; i < need; i += 3, j += 4) {
    rgba[j] = bytes[pos + i];
    rgba[j + 1] = bytes[pos + i + 1];
    rgba[j + 2] = bytes[pos + i + 2];
    rgba[j + 3] = 255;
  }
  return { width, height, rgba };
}
