// One-slot frame buffer decoupling message handling from rendering: the
// render loop always sees the newest frame and never a backlog.

import type { FrameMessage } from './protocol.js'

export class LatestFrame {
  private slot: FrameMessage | null = null
  private lastT = -Infinity

  /** Keep the newer frame; out-of-order or duplicate frames are dropped. */
  put(frame: FrameMessage): void {
    if (frame.t <= this.lastT) return
    this.lastT = frame.t
    this.slot = frame
  }

  /** The newest unseen frame, or null; taking empties the slot. */
  take(): FrameMessage | null {
    const frame = this.slot
    this.slot = null
    return frame
  }

  peek(): FrameMessage | null {
    return this.slot
  }
}
