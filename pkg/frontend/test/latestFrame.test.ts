import { describe, expect, it } from 'vitest'

import { LatestFrame } from '../src/latestFrame.js'
import type { FrameMessage } from '../src/protocol.js'

const frame = (t: number): FrameMessage => ({ type: 'frame', t, emotion: {}, mood: {} })

describe('LatestFrame', () => {
  it('starts empty', () => {
    expect(new LatestFrame().take()).toBeNull()
  })

  it('keeps only the newest of a burst', () => {
    const slot = new LatestFrame()
    slot.put(frame(0.1))
    slot.put(frame(0.2))
    slot.put(frame(0.3))
    expect(slot.take()?.t).toBe(0.3)
    expect(slot.take()).toBeNull()
  })

  it('drops stale and duplicate timestamps', () => {
    const slot = new LatestFrame()
    slot.put(frame(0.5))
    slot.take()
    slot.put(frame(0.4))
    slot.put(frame(0.5))
    expect(slot.take()).toBeNull()
    slot.put(frame(0.6))
    expect(slot.peek()?.t).toBe(0.6)
    expect(slot.take()?.t).toBe(0.6)
  })
})
