// Panel wiring: connect, fetch assets, subscribe, render the latest frame,
// and turn operator gestures into wire commands.

import { ConsoleClient, WsTransport } from './client.js'
import { LatestFrame } from './latestFrame.js'
import { mixVertices, parseAssets, type MorphAssets } from './mixer.js'
import { MAX_TRIGGER_INTENSITY, type Mode, type ServerMessage } from './protocol.js'
import { FaceRenderer } from './renderer.js'

const LABELS = [
  'happy',
  'sad',
  'angry',
  'fear',
  'surprise',
  'disgust',
  'evil',
  'frustrated',
  'enthusiastic',
  'furious',
]

const FPS = 30
const RECONNECT_DELAY_MS = 1500

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id)
  if (!el) throw new Error(`missing element #${id}`)
  return el as T
}

const statusEl = $('status')
const bannerEl = $('banner')
const labelsEl = $('labels')
const barsEl = $('bars')
const historyEl = $('history')
const canvas = $<HTMLCanvasElement>('face')
const padCanvas = $<HTMLCanvasElement>('pad')
const intensityInput = $<HTMLInputElement>('intensity')
const intensityValue = $('intensity-value')
const dominanceInput = $<HTMLInputElement>('dominance')
const modeSelect = $<HTMLSelectElement>('mode')
const resetButton = $('reset')

const renderer = new FaceRenderer(canvas)
const latest = new LatestFrame()

let client: ConsoleClient | null = null
let assets: MorphAssets | null = null
let mixed: Float64Array | null = null
let mode: Mode = 'categorical'
let lastPadSend = 0

function setStatus(text: string, kind: 'live' | 'error' | 'connecting'): void {
  statusEl.textContent = text
  statusEl.className = kind
}

function showBanner(text: string | null): void {
  bannerEl.textContent = text ?? ''
  bannerEl.style.display = text ? 'block' : 'none'
}

function serviceUrl(): string {
  const override = new URLSearchParams(location.search).get('ws')
  if (override) return override
  const proto = location.protocol === 'https:' ? 'wss' : 'ws'
  return `${proto}://${location.hostname}:8765/ws`
}

function handleMessage(message: ServerMessage): void {
  switch (message.type) {
    case 'frame':
      latest.put(message)
      break
    case 'assets':
      assets = parseAssets(message)
      mixed = new Float64Array(assets.rest.length)
      renderer.setAssets(assets)
      break
    case 'ack':
      renderHistory()
      break
    case 'error':
      showBanner(`service: ${message.msg}`)
      break
  }
}

function connect(): void {
  setStatus('connecting…', 'connecting')
  WsTransport.connect(serviceUrl())
    .then((transport) => {
      client = new ConsoleClient(transport, {
        onMessage: handleMessage,
        onClose: () => {
          client = null
          setStatus('disconnected, retrying…', 'error')
          setTimeout(connect, RECONNECT_DELAY_MS)
        },
        onProtocolError: (error) => showBanner(error.message),
      })
      showBanner(null)
      setStatus('live', 'live')
      client.send({ type: 'get_assets' })
      client.send({ type: 'subscribe', fps: FPS, payload: 'intensities' })
      renderHistory()
    })
    .catch((error) => {
      setStatus(String(error.message ?? error), 'error')
      setTimeout(connect, RECONNECT_DELAY_MS)
    })
}

function send(command: Parameters<ConsoleClient['send']>[0]): void {
  if (!client) {
    showBanner('not connected')
    return
  }
  try {
    client.send(command)
    renderHistory()
  } catch (error) {
    showBanner(String((error as Error).message))
  }
}

// -- controls -----------------------------------------------------------------

for (const label of LABELS) {
  const button = document.createElement('button')
  button.textContent = label
  button.onclick = () => send({ type: 'trigger', label, intensity: Number(intensityInput.value) })
  labelsEl.appendChild(button)
}

intensityInput.max = String(MAX_TRIGGER_INTENSITY)
intensityInput.oninput = () => {
  intensityValue.textContent = Number(intensityInput.value).toFixed(2)
}

modeSelect.onchange = () => {
  mode = modeSelect.value as Mode
  send({ type: 'set_mode', mode })
  padCanvas.classList.toggle('disabled', mode !== 'factor')
  dominanceInput.disabled = mode !== 'factor'
}

resetButton.onclick = () => send({ type: 'reset' })

function sendPad(ev: MouseEvent): void {
  if (mode !== 'factor') return
  const now = performance.now()
  if (now - lastPadSend < 1000 / FPS) return // throttle drags to the frame rate
  lastPadSend = now
  const rect = padCanvas.getBoundingClientRect()
  const p = Math.min(1, Math.max(-1, ((ev.clientX - rect.left) / rect.width) * 2 - 1))
  const a = Math.min(1, Math.max(-1, 1 - ((ev.clientY - rect.top) / rect.height) * 2))
  send({ type: 'set_pad', p, a, d: Number(dominanceInput.value) })
  drawPad(p, a)
}

let padDown = false
padCanvas.onmousedown = (ev) => {
  padDown = true
  lastPadSend = 0
  sendPad(ev)
}
padCanvas.onmousemove = (ev) => {
  if (padDown) sendPad(ev)
}
window.addEventListener('mouseup', () => {
  padDown = false
})

function drawPad(p: number, a: number): void {
  const ctx = padCanvas.getContext('2d')!
  const w = padCanvas.width
  const h = padCanvas.height
  ctx.clearRect(0, 0, w, h)
  ctx.strokeStyle = '#4a5a66'
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1)
  ctx.beginPath()
  ctx.moveTo(w / 2, 0)
  ctx.lineTo(w / 2, h)
  ctx.moveTo(0, h / 2)
  ctx.lineTo(w, h / 2)
  ctx.stroke()
  ctx.fillStyle = '#e8b24a'
  ctx.beginPath()
  ctx.arc(((p + 1) / 2) * w, ((1 - a) / 2) * h, 5, 0, Math.PI * 2)
  ctx.fill()
}

// -- readouts -------------------------------------------------------------

function renderBars(emotion: Record<string, number>, mood: Record<string, number>): void {
  const rows = LABELS.map((label) => {
    const e = emotion[label] ?? 0
    const m = mood[label] ?? 0
    if (e === 0 && m === 0) return ''
    const ew = Math.min(100, (e / MAX_TRIGGER_INTENSITY) * 100).toFixed(1)
    const mw = Math.min(100, (m / MAX_TRIGGER_INTENSITY) * 100).toFixed(1)
    return (
      `<div class="bar-row"><span class="bar-label">${label}</span>` +
      `<span class="bar"><i class="emotion" style="width:${ew}%"></i><i class="mood" style="width:${mw}%"></i></span>` +
      `<span class="bar-nums">${e.toFixed(3)} / ${m.toFixed(3)}</span></div>`
    )
  })
  barsEl.innerHTML = rows.join('')
}

function renderHistory(): void {
  if (!client) return
  const recent = client.history.slice(-8).reverse()
  historyEl.innerHTML = recent
    .map((h) => {
      const ack = h.ackT === null ? 'pending' : `ack @ ${h.ackT.toFixed(3)}s`
      return `<li><code>${h.command.type}</code> ${ack}</li>`
    })
    .join('')
}

// -- render loop ----------------------------------------------------------

function frameLoop(): void {
  const frame = latest.take()
  if (frame && assets && mixed) {
    renderBars(frame.emotion, frame.mood)
    mixVertices(assets, frame.emotion, frame.mood, mixed)
    renderer.draw(assets, mixed)
  } else if (!frame && assets && mixed && mixed.every((v) => v === 0)) {
    renderer.draw(assets, assets.rest) // neutral until the first frame lands
  }
  requestAnimationFrame(frameLoop)
}

drawPad(0, 0)
padCanvas.classList.add('disabled')
dominanceInput.disabled = true
connect()
requestAnimationFrame(frameLoop)
