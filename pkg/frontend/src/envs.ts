/**
 * Environment wrappers with the standard step/reset signature.
 *
 * No control logic lives here: each wrapper instantiates the corresponding
 * native environment inside the bridge process and forwards step/reset, so
 * every structural guarantee (augmentation, k appends per step, episode
 * accounting, rewards) is the native one.
 */

import { Frontend, type HandAction, type HandObservation } from "./frontend.js";

export interface AugmentedState {
  observation: HandObservation;
  action: HandAction;
}

export interface StepResult<S> {
  state: S;
  reward: number;
  done: boolean;
  info: Record<string, unknown>;
}

/** State augmentation s_{t+1} = (y_t, a_t); rateDivisor > 1 applies each
 * action that many robot cycles (observation from the first of them). */
export class AugmentedEnv {
  private constructor(private frontend: Frontend) {}

  static async create(frontend: Frontend, rateDivisor = 1): Promise<AugmentedEnv> {
    await frontend.client.call("create_env", {
      kind: "augmented",
      rate_divisor: rateDivisor,
    });
    return new AugmentedEnv(frontend);
  }

  async step(action: HandAction): Promise<StepResult<AugmentedState>> {
    const raw = await this.frontend.client.call<{
      state: AugmentedState;
      reward: number;
      done: boolean;
      info: Record<string, unknown>;
    }>("env_step", { action });
    return raw;
  }
}

/** Approximate reduced-rate mapping: k appends, raw observation state. */
export class ApproxEnv {
  private constructor(private frontend: Frontend) {}

  static async create(frontend: Frontend, rateDivisor: number): Promise<ApproxEnv> {
    await frontend.client.call("create_env", {
      kind: "approx",
      rate_divisor: rateDivisor,
    });
    return new ApproxEnv(frontend);
  }

  async step(action: HandAction): Promise<StepResult<HandObservation>> {
    const raw = await this.frontend.client.call<{
      state: { observation: HandObservation };
      reward: number;
      done: boolean;
      info: Record<string, unknown>;
    }>("env_step", { action });
    return { ...raw, state: raw.state.observation };
  }
}

export interface ReachOptions {
  episodeLength?: number;
  rateDivisor?: number;
  seed?: number;
}

/** Fingertip reaching task; states and actions are plain number arrays. */
export class ReachEnv {
  private constructor(private frontend: Frontend) {}

  static async create(frontend: Frontend, options: ReachOptions = {}): Promise<ReachEnv> {
    await frontend.client.call("create_env", {
      kind: "reach",
      episode_length: options.episodeLength,
      rate_divisor: options.rateDivisor,
      seed: options.seed,
    });
    return new ReachEnv(frontend);
  }

  reset(): Promise<number[]> {
    return this.frontend.client
      .call<{ state: number[] }>("env_reset")
      .then((r) => r.state);
  }

  async step(desiredJointPositions: number[]): Promise<StepResult<number[]>> {
    return this.frontend.client.call("env_step", { action: desiredJointPositions });
  }

  /** The native scripted IK policy (used by the golden-file tests). */
  scriptedPolicy(state: number[]): Promise<number[]> {
    return this.frontend.client
      .call<{ action: number[] }>("reach_policy", { state })
      .then((r) => r.action);
  }
}
