// Session client: validates outgoing commands, parses incoming messages,
// tracks command history with acks. Transport is pluggable so tests can
// drive the client over the service's TCP fallback (identical payloads).

import type { Command, ServerMessage } from './protocol.js'
import { commandProblem, parseServerMessage } from './protocol.js'

export interface Transport {
  send(text: string): void
  close(): void
  set onmessage(cb: (text: string) => void)
  set onclose(cb: () => void)
}

export class WsTransport implements Transport {
  private handlers: { message: (text: string) => void; close: () => void } = {
    message: () => {},
    close: () => {},
  }

  private constructor(private ws: WebSocket) {
    ws.onmessage = (ev) => this.handlers.message(String(ev.data))
    ws.onclose = () => this.handlers.close()
  }

  static connect(url: string, timeoutMs = 5000): Promise<WsTransport> {
    return new Promise((resolve, reject) => {
      const ws = new WebSocket(url)
      const timer = setTimeout(() => {
        ws.close()
        reject(new Error(`connection to ${url} timed out`))
      }, timeoutMs)
      ws.onopen = () => {
        clearTimeout(timer)
        resolve(new WsTransport(ws))
      }
      ws.onerror = () => {
        clearTimeout(timer)
        reject(new Error(`could not reach ${url}`))
      }
    })
  }

  send(text: string): void {
    this.ws.send(text)
  }

  close(): void {
    this.ws.close()
  }

  set onmessage(cb: (text: string) => void) {
    this.handlers.message = cb
  }

  set onclose(cb: () => void) {
    this.handlers.close = cb
  }
}

export interface SentCommand {
  command: Command
  sentAt: number
  ackT: number | null
}

export interface ClientEvents {
  onMessage?: (message: ServerMessage) => void
  onClose?: () => void
  onProtocolError?: (error: Error) => void
}

export class ConsoleClient {
  readonly history: SentCommand[] = []

  constructor(
    private transport: Transport,
    private events: ClientEvents = {},
  ) {
    transport.onmessage = (text) => this.receive(text)
    transport.onclose = () => this.events.onClose?.()
  }

  /** Validate against the wire schema, then send. Throws on schema violations. */
  send(command: Command): void {
    const problem = commandProblem(command)
    if (problem) throw new Error(`refusing to send: ${problem}`)
    this.history.push({ command, sentAt: Date.now(), ackT: null })
    this.transport.send(JSON.stringify(command))
  }

  close(): void {
    this.transport.close()
  }

  private receive(text: string): void {
    let message: ServerMessage
    try {
      message = parseServerMessage(text)
    } catch (error) {
      this.events.onProtocolError?.(error as Error)
      return
    }
    if (message.type === 'ack') {
      // acks arrive in send order: subscribe immediately, engine commands at
      // the frame boundary that applies them; get_assets is answered with an
      // assets message instead and never acked
      const pending = this.history.find((h) => h.ackT === null && h.command.type !== 'get_assets')
      if (pending) pending.ackT = message.t
    }
    this.events.onMessage?.(message)
  }
}
