/**
 * The robot front-end: append desired actions, read synchronized histories.
 *
 * Byte-for-byte the native semantics: every method is a thin forward to the
 * native front-end running in the bridge process, including the blocking
 * behavior of reads for future time indices and the typed error cases
 * (evicted index, timeout, shutdown).
 */

import { BridgeClient } from "./client.js";

export interface HandAction {
  torque: number[];
  position?: number[] | null;
  kp?: number[] | null;
  kd?: number[] | null;
}

export interface HandObservation {
  position: number[];
  velocity: number[];
  torque: number[];
}

export interface StatusRecord {
  state: "ok" | "action_repeated" | "shutdown";
  message: string;
}

export interface RobotOptions {
  capacity?: number;
  mode?: "real_time" | "non_real_time";
  delta?: number;
  maxMissedActions?: number;
  lateActionPolicy?: "shutdown" | "repeat_previous";
  patience?: number;
  pythonExecutable?: string;
}

export class Frontend {
  private constructor(readonly client: BridgeClient) {}

  /** Spawn a bridge process owning a simulated robot and connect to it. */
  static async create(options: RobotOptions = {}): Promise<Frontend> {
    const client = new BridgeClient(options.pythonExecutable);
    await client.call("create_robot", {
      capacity: options.capacity,
      mode: options.mode,
      delta: options.delta,
      max_missed_actions: options.maxMissedActions,
      late_action_policy: options.lateActionPolicy,
      patience: options.patience,
    });
    return new Frontend(client);
  }

  appendDesiredAction(action: HandAction): Promise<number> {
    return this.client
      .call<{ t: number }>("append_desired_action", { action })
      .then((r) => r.t);
  }

  getObservation(t: number, timeout?: number): Promise<HandObservation> {
    return this.client.call("get_observation", { t, timeout });
  }

  getDesiredAction(t: number, timeout?: number): Promise<HandAction> {
    return this.client.call("get_desired_action", { t, timeout });
  }

  getAppliedAction(t: number, timeout?: number): Promise<HandAction> {
    return this.client.call("get_applied_action", { t, timeout });
  }

  getStatus(t: number, timeout?: number): Promise<StatusRecord> {
    return this.client.call("get_status", { t, timeout });
  }

  /** Write the synchronized robot-data log via the native logger. */
  writeLog(path: string, start?: number, stop?: number): Promise<number> {
    return this.client
      .call<{ rows: number }>("write_log", { path, start, stop })
      .then((r) => r.rows);
  }

  /** Stop the back-end (blocked readers are released with ShutdownError). */
  stopBackend(): Promise<unknown> {
    return this.client.call("stop_backend");
  }

  close(): Promise<void> {
    return this.client.close();
  }
}
