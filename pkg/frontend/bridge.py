#!/usr/bin/env python3
"""Line-JSON bridge: drives one simulated robot for a foreign-language client.

Reads one JSON request per line on stdin, writes one JSON response per line
on stdout.  The bridge owns a single robot stack (data, driver, back-end,
front-end) and optionally one environment wrapper on top of it; all behavior
lives in the `trimanip` package, the bridge only translates calls.

Protocol:
    request:  {"id": n, "op": "...", "args": {...}}
    response: {"id": n, "ok": true, "result": ...}
            | {"id": n, "ok": false, "error": {"type": "...", "message": "..."}}

Floats travel as JSON numbers (shortest round-trip decimal on both sides),
so values survive the hop bit for bit.
"""

import json
import sys

import numpy as np

from trimanip import (
    Backend,
    BackendConfig,
    Frontend,
    HandAction,
    HandGeometry,
    LateActionPolicy,
    Mode,
    ReachEnv,
    ReachTaskSpec,
    ReducedRateEnv,
    RobotData,
    SimDriver,
    SimulatedClock,
    reach_policy,
)
from trimanip.envs import ApproxEnv
from trimanip.log_csv import write_log


def action_from_json(obj) -> HandAction:
    return HandAction(
        torque=np.asarray(obj["torque"], dtype=float),
        position=None if obj.get("position") is None else np.asarray(obj["position"], dtype=float),
        position_kp=None if obj.get("kp") is None else np.asarray(obj["kp"], dtype=float),
        position_kd=None if obj.get("kd") is None else np.asarray(obj["kd"], dtype=float),
    )


def action_to_json(action: HandAction):
    return {
        "torque": list(action.torque),
        "position": None if action.position is None else list(action.position),
        "kp": None if action.position_kp is None else list(action.position_kp),
        "kd": None if action.position_kd is None else list(action.position_kd),
    }


def observation_to_json(obs):
    return {
        "position": list(obs.position),
        "velocity": list(obs.velocity),
        "torque": list(obs.torque),
    }


class BridgeSession:
    def __init__(self):
        self.backend = None
        self.frontend = None
        self.data = None
        self.geometry = None
        self.env = None

    # -- robot lifecycle -----------------------------------------------------
    def op_create_robot(self, args):
        if self.backend is not None:
            raise RuntimeError("robot already created for this bridge")
        clock = SimulatedClock(patience=float(args.get("patience", 10.0)))
        self.geometry = HandGeometry.symmetric()
        self.data = RobotData(capacity=int(args.get("capacity", 30_000)), clock=clock)
        config = BackendConfig(
            mode=Mode(args.get("mode", "non_real_time")),
            delta=float(args.get("delta", 0.001)),
            max_missed_actions=int(args.get("max_missed_actions", 10)),
            late_action_policy=LateActionPolicy(
                args.get("late_action_policy", "repeat_previous")
            ),
        )
        driver = SimDriver(geometry=self.geometry, clock=clock)
        self.backend = Backend(driver, self.data, config).start()
        self.frontend = Frontend(self.data)
        return {}

    def op_stop_backend(self, args):
        if self.backend is not None:
            self.backend.stop()
            self.backend.join(10.0)
        return {}

    # -- front-end calls ------------------------------------------------------
    def op_append_desired_action(self, args):
        t = self.frontend.append_desired_action(action_from_json(args["action"]))
        return {"t": t}

    def op_get_observation(self, args):
        obs = self.frontend.get_observation(int(args["t"]), args.get("timeout"))
        return observation_to_json(obs)

    def op_get_desired_action(self, args):
        return action_to_json(self.frontend.get_desired_action(int(args["t"]), args.get("timeout")))

    def op_get_applied_action(self, args):
        return action_to_json(self.frontend.get_applied_action(int(args["t"]), args.get("timeout")))

    def op_get_status(self, args):
        record = self.frontend.get_status(int(args["t"]), args.get("timeout"))
        return {"state": record.state.value, "message": record.message}

    def op_write_log(self, args):
        rows = write_log(
            self.data,
            args["path"],
            start=int(args.get("start", 0)),
            stop=None if args.get("stop") is None else int(args["stop"]),
        )
        return {"rows": rows}

    # -- environment wrappers --------------------------------------------------
    def op_create_env(self, args):
        kind = args["kind"]
        divisor = int(args.get("rate_divisor", 1))
        if kind == "augmented":
            self.env = ReducedRateEnv(self.frontend, rate_divisor=divisor)
        elif kind == "approx":
            self.env = ApproxEnv(self.frontend, rate_divisor=divisor)
        elif kind == "reach":
            spec = ReachTaskSpec(
                episode_length=float(args.get("episode_length", 2.0)),
                rate_divisor=int(args.get("rate_divisor", 10)),
            )
            self.env = ReachEnv(
                self.frontend, self.geometry, spec=spec, seed=int(args.get("seed", 0))
            )
        else:
            raise ValueError(f"unknown env kind {kind!r}")
        return {}

    def op_env_reset(self, args):
        state = self.env.reset()
        return {"state": list(state)}

    def op_env_step(self, args):
        if isinstance(self.env, ReachEnv):
            state, reward, done, info = self.env.step(
                np.asarray(args["action"], dtype=float)
            )
            return {
                "state": list(state),
                "reward": reward,
                "done": done,
                "info": {"t": info["t"], "tip_errors": list(info["tip_errors"])},
            }
        state, reward, done, info = self.env.step(action_from_json(args["action"]))
        if hasattr(state, "observation"):  # augmented mapping
            state_json = {
                "observation": observation_to_json(state.observation),
                "action": action_to_json(state.action),
            }
        else:  # approximate mapping: the raw observation
            state_json = {"observation": observation_to_json(state)}
        return {"state": state_json, "reward": reward, "done": done, "info": {"t": info["t"]}}

    def op_reach_policy(self, args):
        action = reach_policy(self.geometry, np.asarray(args["state"], dtype=float))
        return {"action": list(action)}

    def op_ping(self, args):
        return {"pong": True}

    def dispatch(self, op, args):
        handler = getattr(self, f"op_{op}", None)
        if handler is None:
            raise ValueError(f"unknown op {op!r}")
        return handler(args)


def main():
    session = BridgeSession()
    try:
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            request = json.loads(line)
            try:
                result = session.dispatch(request["op"], request.get("args", {}))
                response = {"id": request["id"], "ok": True, "result": result}
            except Exception as exc:
                response = {
                    "id": request["id"],
                    "ok": False,
                    "error": {"type": type(exc).__name__, "message": str(exc)},
                }
            sys.stdout.write(json.dumps(response) + "\n")
            sys.stdout.flush()
    finally:
        session.op_stop_backend({})


if __name__ == "__main__":
    main()
