import jsQR from "jsqr";
import { describe, expect, it } from "vitest";

import { qrRaster } from "../src/qr";

describe("qr rasterization", () => {
  it("produces a code that scans back to the payload", () => {
    const payload = "https://www.muis.ee/museaalview/ERM-800%3A001";
    const raster = qrRaster(payload);
    const decoded = jsQR(raster.data, raster.width, raster.height);
    expect(decoded).not.toBeNull();
    expect(decoded!.data).toBe(payload);
  });

  it("scans at the kiosk's display scale too", () => {
    const payload = "https://www.muis.ee/museaalview/123456";
    const raster = qrRaster(payload, 4, 2);
    const decoded = jsQR(raster.data, raster.width, raster.height);
    expect(decoded!.data).toBe(payload);
  });

  it("pixels are opaque black on white", () => {
    const raster = qrRaster("x");
    for (let i = 3; i < raster.data.length; i += 4) {
      expect(raster.data[i]).toBe(255); // alpha
    }
    const colors = new Set<number>();
    for (let i = 0; i < raster.data.length; i += 4) colors.add(raster.data[i]);
    expect([...colors].sort()).toEqual([0, 255]);
  });
});
