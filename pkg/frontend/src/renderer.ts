// Canvas frame blitting and overlays (connection lost, staleness).

import { base64ToBytes, decodePpm } from "./ppm.js";

export class CanvasRenderer {
  private readonly ctx: CanvasRenderingContext2D;
  private image: ImageData | null = null;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (ctx === null) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
  }

  /** Decode and keep the newest frame; actual drawing happens in draw(). */
  setFrame(ppmB64: string): void {
    const { width, height, rgba } = decodePpm(base64ToBytes(ppmB64));
    if (this.canvas.width !== width || this.canvas.height !== height) {
      this.canvas.width = width;
      this.canvas.height = height;
    }
    this.image = new ImageData(rgba, width, height);
  }

  draw(hudLines: string[], connectionLost: boolean): void {
    const { ctx, canvas } = this;
    if (this.image !== null) {
      ctx.putImageData(this.image, 0, 0);
    } else {
      ctx.fillStyle = "#202830";
      ctx.fillRect(0, 0, canvas.width, canvas.height);
      ctx.fillStyle = "#d0d8e0";
      ctx.font = "20px monospace";
      ctx.fillText("waiting for first frame...", 24, canvas.height / 2);
    }
    ctx.font = "14px monospace";
    for (let i = 0; i < hudLines.length; i++) {
      const text = hudLines[i];
      ctx.fillStyle = "rgba(0,0,0,0.55)";
      ctx.fillRect(8, 8 + i * 20, 8 + ctx.measureText(text).width, 18);
      ctx.fillStyle = text === "STALE FRAME" ? "#ffb03a" : "#e8f0e8";
      ctx.fillText(text, 12, 22 + i * 20);
    }
    if (connectionLost) {
      ctx.fillStyle = "rgba(40,0,0,0.6)";
      ctx.fillRect(0, 0, canvas.width, canvas.height);
      ctx.fillStyle = "#ffd0d0";
      ctx.font = "28px monospace";
      ctx.fillText("connection lost", canvas.width / 2 - 110, canvas.height / 2);
    }
  }
}
