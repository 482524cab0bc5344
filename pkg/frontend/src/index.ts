export { BridgeClient } from "./client.js";
export {
  BridgeError,
  EvictedIndexError,
  ShutdownError,
  WaitTimeoutError,
} from "./errors.js";
export {
  Frontend,
  type HandAction,
  type HandObservation,
  type RobotOptions,
  type StatusRecord,
} from "./frontend.js";
export {
  ApproxEnv,
  AugmentedEnv,
  ReachEnv,
  type AugmentedState,
  type ReachOptions,
  type StepResult,
} from "./envs.js";
