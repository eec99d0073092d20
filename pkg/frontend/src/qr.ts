// Client-side QR rasterization. The server sends only the payload string
// (the archive URL); turning it into pixels is the kiosk's job.
//
// One rasterizer feeds both the on-screen canvas and the tests, so what
// the suite decodes is exactly what the visitor scans.

import QRCode from "qrcode";

export interface QrRaster {
  width: number;
  height: number;
  /** RGBA, 4 bytes per pixel. */
  data: Uint8ClampedArray<ArrayBuffer>;
}

export function qrRaster(payload: string, scale = 8, margin = 4): QrRaster {
  const model = QRCode.create(payload, { errorCorrectionLevel: "M" });
  const size = model.modules.size;
  const modules = model.modules.data;
  const width = (size + margin * 2) * scale;
  const data = new Uint8ClampedArray(width * width * 4);
  data.fill(255); // white field, full alpha

  for (let row = 0; row < size; row++) {
    for (let col = 0; col < size; col++) {
      if (!modules[row * size + col]) continue;
      const top = (row + margin) * scale;
      const left = (col + margin) * scale;
      for (let y = top; y < top + scale; y++) {
        for (let x = left; x < left + scale; x++) {
          const offset = (y * width + x) * 4;
          data[offset] = 0;
          data[offset + 1] = 0;
          data[offset + 2] = 0;
        }
      }
    }
  }
  return { width, height: width, data };
}

export function renderQrToCanvas(canvas: HTMLCanvasElement, payload: string): void {
  const raster = qrRaster(payload);
  canvas.width = raster.width;
  canvas.height = raster.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.putImageData(new ImageData(raster.data, raster.width, raster.height), 0, 0);
}
