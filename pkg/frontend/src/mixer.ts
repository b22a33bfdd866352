// Client-side morph mixing: the console never synthesizes intensities, it
// only mixes rest + weight * delta from the asset bundle. Mood weights use
// the jaw-excluded delta set, so the closed-jaw rule needs no client logic.

import type { AssetsMessage, IntensityMap } from './protocol.js'
import { ProtocolError } from './protocol.js'

export interface MorphAssets {
  vertexCount: number
  rest: Float64Array
  faces: Uint32Array
  targets: Map<string, Float64Array>
  moodTargets: Map<string, Float64Array>
}

function pack(rows: number[][], width: number): Float64Array {
  const out = new Float64Array(rows.length * width)
  for (let i = 0; i < rows.length; i++) {
    const row = rows[i]!
    for (let j = 0; j < width; j++) out[i * width + j] = row[j]!
  }
  return out
}

export function parseAssets(message: AssetsMessage): MorphAssets {
  const vertexCount = message.mesh.vertices.length
  const packTargets = (block: Record<string, number[][]>) => {
    const map = new Map<string, Float64Array>()
    for (const [label, rows] of Object.entries(block)) {
      if (rows.length !== vertexCount)
        throw new ProtocolError(`morph target ${label} has ${rows.length} rows for ${vertexCount} vertices`)
      map.set(label, pack(rows, 3))
    }
    return map
  }
  const faces = new Uint32Array(message.mesh.faces.length * 3)
  message.mesh.faces.forEach((face, i) => {
    for (let j = 0; j < 3; j++) {
      const v = face[j]!
      if (!Number.isInteger(v) || v < 0 || v >= vertexCount) throw new ProtocolError(`face index ${v} out of range`)
      faces[i * 3 + j] = v
    }
  })
  return {
    vertexCount,
    rest: pack(message.mesh.vertices, 3),
    faces,
    targets: packTargets(message.morphs.targets),
    moodTargets: packTargets(message.morphs.mood_targets),
  }
}

/** rest + sum emotion_l * target_l + sum mood_l * moodTarget_l, packed xyz. */
export function mixVertices(
  assets: MorphAssets,
  emotion: IntensityMap,
  mood: IntensityMap,
  out?: Float64Array,
): Float64Array {
  const n = assets.rest.length
  const mixed = out && out.length === n ? out : new Float64Array(n)
  mixed.set(assets.rest)
  const accumulate = (weights: IntensityMap, deltas: Map<string, Float64Array>, kind: string) => {
    for (const [label, weight] of Object.entries(weights)) {
      if (weight === 0) continue
      const delta = deltas.get(label)
      if (!delta) throw new ProtocolError(`no ${kind} morph target for label ${label}`)
      for (let i = 0; i < n; i++) mixed[i] = mixed[i]! + weight * delta[i]!
    }
  }
  accumulate(emotion, assets.targets, 'emotion')
  accumulate(mood, assets.moodTargets, 'mood')
  return mixed
}
