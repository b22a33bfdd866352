// Canvas 2D front-view wireframe of the face mesh. Mesh coordinates are
// x right, y down, z toward the viewer; the projection drops z and keeps
// the handedness, so the screen shows the face as a mirror would.

import type { MorphAssets } from './mixer.js'

export class FaceRenderer {
  private ctx: CanvasRenderingContext2D
  private scale = 1
  private cx = 0
  private cy = 0
  private offsetX = 0
  private offsetY = 0

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext('2d')
    if (!ctx) throw new Error('canvas 2d context unavailable')
    this.ctx = ctx
  }

  /** Fit the rest pose into the canvas; call once per asset bundle. */
  setAssets(assets: MorphAssets): void {
    let minX = Infinity
    let maxX = -Infinity
    let minY = Infinity
    let maxY = -Infinity
    for (let i = 0; i < assets.vertexCount; i++) {
      const x = assets.rest[i * 3]!
      const y = assets.rest[i * 3 + 1]!
      if (x < minX) minX = x
      if (x > maxX) maxX = x
      if (y < minY) minY = y
      if (y > maxY) maxY = y
    }
    const spanX = maxX - minX || 1
    const spanY = maxY - minY || 1
    this.scale = 0.8 * Math.min(this.canvas.width / spanX, this.canvas.height / spanY)
    this.cx = (minX + maxX) / 2
    this.cy = (minY + maxY) / 2
    this.offsetX = this.canvas.width / 2
    this.offsetY = this.canvas.height / 2
  }

  draw(assets: MorphAssets, vertices: Float64Array): void {
    const { ctx } = this
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height)
    ctx.lineWidth = 0.6
    ctx.strokeStyle = 'rgba(110, 160, 190, 0.55)'
    ctx.beginPath()
    const faces = assets.faces
    for (let f = 0; f < faces.length; f += 3) {
      const a = faces[f]! * 3
      const b = faces[f + 1]! * 3
      const c = faces[f + 2]! * 3
      const ax = this.sx(vertices[a]!)
      const ay = this.sy(vertices[a + 1]!)
      ctx.moveTo(ax, ay)
      ctx.lineTo(this.sx(vertices[b]!), this.sy(vertices[b + 1]!))
      ctx.lineTo(this.sx(vertices[c]!), this.sy(vertices[c + 1]!))
      ctx.lineTo(ax, ay)
    }
    ctx.stroke()
    ctx.fillStyle = '#dce8f0'
    for (let i = 0; i < vertices.length; i += 3) {
      ctx.fillRect(this.sx(vertices[i]!) - 0.75, this.sy(vertices[i + 1]!) - 0.75, 1.5, 1.5)
    }
  }

  private sx(x: number): number {
    return this.offsetX + (x - this.cx) * this.scale
  }

  private sy(y: number): number {
    return this.offsetY + (y - this.cy) * this.scale
  }
}
