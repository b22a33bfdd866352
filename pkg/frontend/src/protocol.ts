// Wire schema for the live service: one JSON object per message, both ways.
// Outgoing commands are validated before sending; incoming messages are
// validated before anything downstream sees them.

export const MAX_TRIGGER_INTENSITY = 2.4

export type Mode = 'categorical' | 'factor'
export type Payload = 'intensities' | 'features' | 'both'

export interface TriggerCommand {
  type: 'trigger'
  label: string
  intensity: number
}

export interface SetPadCommand {
  type: 'set_pad'
  p: number
  a: number
  d: number
}

export interface SetModeCommand {
  type: 'set_mode'
  mode: Mode
}

export interface ResetCommand {
  type: 'reset'
}

export interface SubscribeCommand {
  type: 'subscribe'
  fps?: number
  payload?: Payload
}

export interface GetAssetsCommand {
  type: 'get_assets'
}

export type Command =
  | TriggerCommand
  | SetPadCommand
  | SetModeCommand
  | ResetCommand
  | SubscribeCommand
  | GetAssetsCommand

export type IntensityMap = Record<string, number>

export interface AckMessage {
  type: 'ack'
  t: number
}

export interface FrameMessage {
  type: 'frame'
  t: number
  emotion: IntensityMap
  mood: IntensityMap
  features?: Record<string, [number, number, number]>
}

export interface MeshDocument {
  vertices: number[][]
  faces: number[][]
}

export interface MorphDocument {
  format: string
  rest: string
  targets: Record<string, number[][]>
  mood_targets: Record<string, number[][]>
}

export interface AssetsMessage {
  type: 'assets'
  mesh: MeshDocument
  rig: unknown
  morphs: MorphDocument
}

export interface ErrorMessage {
  type: 'error'
  msg: string
}

export type ServerMessage = AckMessage | FrameMessage | AssetsMessage | ErrorMessage

const isRecord = (v: unknown): v is Record<string, unknown> =>
  typeof v === 'object' && v !== null && !Array.isArray(v)

const isFiniteNumber = (v: unknown): v is number => typeof v === 'number' && Number.isFinite(v)

function isIntensityMap(v: unknown): v is IntensityMap {
  if (!isRecord(v)) return false
  return Object.values(v).every(isFiniteNumber)
}

function isVectorTable(v: unknown, width: number): v is number[][] {
  return Array.isArray(v) && v.every((row) => Array.isArray(row) && row.length === width && row.every(isFiniteNumber))
}

/** Null when the command is wire-legal, otherwise the reason it is not. */
export function commandProblem(cmd: unknown): string | null {
  if (!isRecord(cmd) || typeof cmd.type !== 'string') return 'command must be an object with a type'
  switch (cmd.type) {
    case 'trigger':
      if (typeof cmd.label !== 'string' || cmd.label.length === 0) return 'trigger needs a label'
      if (!isFiniteNumber(cmd.intensity)) return 'trigger needs a finite intensity'
      if (cmd.intensity < 0 || cmd.intensity > MAX_TRIGGER_INTENSITY)
        return `intensity must be in [0, ${MAX_TRIGGER_INTENSITY}]`
      return null
    case 'set_pad':
      for (const axis of ['p', 'a', 'd'] as const) {
        const value = cmd[axis]
        if (!isFiniteNumber(value) || value < -1 || value > 1) return `${axis} must be in [-1, 1]`
      }
      return null
    case 'set_mode':
      return cmd.mode === 'categorical' || cmd.mode === 'factor' ? null : 'mode must be categorical or factor'
    case 'reset':
    case 'get_assets':
      return null
    case 'subscribe':
      if (cmd.fps !== undefined && (!isFiniteNumber(cmd.fps) || cmd.fps <= 0)) return 'fps must be positive'
      if (cmd.payload !== undefined && !['intensities', 'features', 'both'].includes(cmd.payload as string))
        return 'payload must be intensities, features or both'
      return null
    default:
      return `unknown command type ${JSON.stringify(cmd.type)}`
  }
}

export class ProtocolError extends Error {}

/** Parse and validate one server message; throws ProtocolError on violations. */
export function parseServerMessage(text: string): ServerMessage {
  let raw: unknown
  try {
    raw = JSON.parse(text)
  } catch {
    throw new ProtocolError('server message is not valid JSON')
  }
  if (!isRecord(raw) || typeof raw.type !== 'string') throw new ProtocolError('server message has no type')
  switch (raw.type) {
    case 'ack':
      if (!isFiniteNumber(raw.t)) throw new ProtocolError('ack without a finite t')
      return { type: 'ack', t: raw.t }
    case 'error':
      if (typeof raw.msg !== 'string') throw new ProtocolError('error without msg')
      return { type: 'error', msg: raw.msg }
    case 'frame': {
      if (!isFiniteNumber(raw.t)) throw new ProtocolError('frame without a finite t')
      if (!isIntensityMap(raw.emotion) || !isIntensityMap(raw.mood))
        throw new ProtocolError('frame intensity maps malformed')
      const frame: FrameMessage = { type: 'frame', t: raw.t, emotion: raw.emotion, mood: raw.mood }
      if (raw.features !== undefined) {
        if (!isRecord(raw.features)) throw new ProtocolError('frame features malformed')
        for (const vec of Object.values(raw.features)) {
          if (!Array.isArray(vec) || vec.length !== 3 || !vec.every(isFiniteNumber))
            throw new ProtocolError('frame feature vector malformed')
        }
        frame.features = raw.features as Record<string, [number, number, number]>
      }
      return frame
    }
    case 'assets': {
      const mesh = raw.mesh
      if (!isRecord(mesh) || !isVectorTable(mesh.vertices, 3) || !isVectorTable(mesh.faces, 3))
        throw new ProtocolError('assets mesh malformed')
      const morphs = raw.morphs
      if (
        !isRecord(morphs) ||
        typeof morphs.format !== 'string' ||
        !isRecord(morphs.targets) ||
        !isRecord(morphs.mood_targets)
      )
        throw new ProtocolError('assets morph document malformed')
      for (const block of [morphs.targets, morphs.mood_targets] as Record<string, unknown>[]) {
        for (const rows of Object.values(block)) {
          if (!isVectorTable(rows, 3)) throw new ProtocolError('morph target rows malformed')
        }
      }
      return {
        type: 'assets',
        mesh: mesh as unknown as MeshDocument,
        rig: raw.rig,
        morphs: morphs as unknown as MorphDocument,
      }
    }
    default:
      throw new ProtocolError(`unknown server message type ${JSON.stringify(raw.type)}`)
  }
}
