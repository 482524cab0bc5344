/**
 * Child-process bridge client.
 *
 * Spawns the Python bridge (which owns the actual robot stack) and speaks
 * line-delimited JSON with it.  Requests are answered in order; blocking
 * native calls simply delay the response, so the promise timeline matches
 * the native blocking semantics.
 */

import { spawn, type ChildProcessByStdio } from "node:child_process";
import { createInterface, type Interface } from "node:readline";
import { dirname, join } from "node:path";
import type { Readable, Writable } from "node:stream";
import { fileURLToPath } from "node:url";

import { errorFromBridge } from "./errors.js";

const BRIDGE_PATH = join(dirname(fileURLToPath(import.meta.url)), "..", "bridge.py");

interface Pending {
  resolve: (value: unknown) => void;
  reject: (error: Error) => void;
}

export class BridgeClient {
  private child: ChildProcessByStdio<Writable, Readable, null>;
  private reader: Interface;
  private pending = new Map<number, Pending>();
  private nextId = 1;
  private closed = false;

  constructor(pythonExecutable?: string) {
    const python = pythonExecutable ?? process.env.TRIMANIP_PYTHON ?? "python3";
    this.child = spawn(python, [BRIDGE_PATH], { stdio: ["pipe", "pipe", "inherit"] });
    this.reader = createInterface({ input: this.child.stdout });
    this.reader.on("line", (line) => this.onLine(line));
    this.child.on("exit", () => this.failAll(new Error("bridge process exited")));
  }

  private onLine(line: string): void {
    const response = JSON.parse(line) as {
      id: number;
      ok: boolean;
      result?: unknown;
      error?: { type: string; message: string };
    };
    const pending = this.pending.get(response.id);
    if (pending === undefined) return;
    this.pending.delete(response.id);
    if (response.ok) {
      pending.resolve(response.result);
    } else {
      pending.reject(errorFromBridge(response.error!.type, response.error!.message));
    }
  }

  private failAll(error: Error): void {
    if (this.closed) return;
    this.closed = true;
    for (const pending of this.pending.values()) pending.reject(error);
    this.pending.clear();
  }

  call<T>(op: string, args: Record<string, unknown> = {}): Promise<T> {
    if (this.closed) return Promise.reject(new Error("bridge is closed"));
    const id = this.nextId++;
    const promise = new Promise<T>((resolve, reject) => {
      this.pending.set(id, { resolve: resolve as (v: unknown) => void, reject });
    });
    this.child.stdin.write(JSON.stringify({ id, op, args }) + "\n");
    return promise;
  }

  async close(): Promise<void> {
    if (this.closed) return;
    try {
      await this.call("stop_backend");
    } catch {
      // the bridge may already be gone; closing is best-effort
    }
    this.closed = true;
    this.child.stdin.end();
    await new Promise<void>((resolve) => {
      this.child.once("exit", () => resolve());
      setTimeout(() => {
        this.child.kill();
        resolve();
      }, 2000).unref();
    });
  }
}
