"""Pipeline configuration: one documented JSON file, degrees at the boundary.

Every key is optional and falls back to the committed defaults; unknown
keys are rejected so typos fail loudly at load time instead of silently
running with defaults.
"""
import json
import math
import pathlib
from dataclasses import dataclass, replace

from .bus import DEFAULT_PORT, parse_address
from .control import (DEFAULT_CONTROL_DT, PidGains, ServoPlant,
                      SpeedGuardConfig)
from .errors import ConfigError
from .facepose import FaceGeometryConfig, default_config
from .kinematics import WorkspaceLimits
from .trajectory import DEFAULT_T_MIN, DEFAULT_V_MAX

METHODS = ("geometry", "regression")


@dataclass(frozen=True)
class PipelineConfig:
    """Validated runtime settings, radians/seconds internally."""

    method: str = "geometry"
    model_horizontal: str = None
    model_vertical: str = None
    workspace: WorkspaceLimits = WorkspaceLimits()
    gains: PidGains = PidGains()
    control_dt: float = DEFAULT_CONTROL_DT
    guard: SpeedGuardConfig = SpeedGuardConfig()
    planner_v_max: float = DEFAULT_V_MAX
    planner_t_min: float = DEFAULT_T_MIN
    servo: ServoPlant = ServoPlant()
    face: FaceGeometryConfig = None
    broker: tuple = ("127.0.0.1", DEFAULT_PORT)
    batch: bool = False
    settle_tail_s: float = 1.5
    joint_state_stride: int = 4

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.method == "regression" and not (self.model_horizontal and self.model_vertical):
            raise ConfigError("regression method needs both model paths")
        if self.control_dt <= 0.0 or self.settle_tail_s < 0.0:
            raise ConfigError("control_dt must be positive, settle tail non-negative")
        if min(self.workspace) <= 0.0:
            raise ConfigError("workspace limits must be strictly positive")
        if min(self.gains.kp, self.gains.ki, self.gains.kd) < 0.0 or self.gains.i_max <= 0.0:
            raise ConfigError("PID gains must be >= 0 with a positive integral clamp")
        if self.guard.max_head_speed <= 0.0 or self.guard.window < 1:
            raise ConfigError("speed guard settings must be positive")
        if self.planner_v_max <= 0.0 or self.planner_t_min <= 0.0:
            raise ConfigError("planner speed bound and minimum duration must be positive")
        if self.servo.v_limit <= 0.0 or self.servo.tau <= 0.0:
            raise ConfigError("servo limit and time constant must be positive")
        if self.face is None:
            object.__setattr__(self, "face", default_config())


def _take(section: dict, allowed, where: str):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")
    return section


def _rad(deg):
    return math.radians(float(deg))


def parse_config(raw: dict, base: pathlib.Path = None) -> PipelineConfig:
    _take(raw, {"method", "models", "workspace_deg", "pid", "control_dt_s",
                "speed_guard", "planner", "servo", "face_geometry", "broker",
                "batch", "settle_tail_s", "joint_state_stride"}, "config root")
    cfg = PipelineConfig()

    def path_of(p):
        p = pathlib.Path(p)
        return str(p if p.is_absolute() or base is None else base / p)

    kwargs = {}
    if "method" in raw:
        kwargs["method"] = raw["method"]
    if "models" in raw:
        m = _take(raw["models"], {"horizontal", "vertical"}, "models")
        if "horizontal" in m:
            kwargs["model_horizontal"] = path_of(m["horizontal"])
        if "vertical" in m:
            kwargs["model_vertical"] = path_of(m["vertical"])
    if "workspace_deg" in raw:
        w = _take(raw["workspace_deg"], {"roll", "pitch", "yaw"}, "workspace_deg")
        ws = cfg.workspace
        kwargs["workspace"] = WorkspaceLimits(
            max_roll=_rad(w.get("roll", math.degrees(ws.max_roll))),
            max_pitch=_rad(w.get("pitch", math.degrees(ws.max_pitch))),
            max_yaw=_rad(w.get("yaw", math.degrees(ws.max_yaw))))
    if "pid" in raw:
        p = _take(raw["pid"], {"kp", "ki", "kd", "i_max"}, "pid")
        g = cfg.gains
        kwargs["gains"] = PidGains(kp=float(p.get("kp", g.kp)), ki=float(p.get("ki", g.ki)),
                                   kd=float(p.get("kd", g.kd)),
                                   i_max=float(p.get("i_max", g.i_max)))
    if "control_dt_s" in raw:
        kwargs["control_dt"] = float(raw["control_dt_s"])
    if "speed_guard" in raw:
        s = _take(raw["speed_guard"], {"max_speed_deg_s", "window"}, "speed_guard")
        gd = cfg.guard
        kwargs["guard"] = SpeedGuardConfig(
            max_head_speed=_rad(s["max_speed_deg_s"]) if "max_speed_deg_s" in s
            else gd.max_head_speed,
            window=int(s.get("window", gd.window)))
    if "planner" in raw:
        p = _take(raw["planner"], {"v_max_deg_s", "t_min_s"}, "planner")
        if "v_max_deg_s" in p:
            kwargs["planner_v_max"] = _rad(p["v_max_deg_s"])
        if "t_min_s" in p:
            kwargs["planner_t_min"] = float(p["t_min_s"])
    if "servo" in raw:
        s = _take(raw["servo"], {"v_limit_deg_s", "tau_s"}, "servo")
        sv = cfg.servo
        kwargs["servo"] = ServoPlant(
            v_limit=_rad(s["v_limit_deg_s"]) if "v_limit_deg_s" in s else sv.v_limit,
            tau=float(s.get("tau_s", sv.tau)))
    if "face_geometry" in raw:
        f = _take(raw["face_geometry"],
                  {"left_eye", "right_eye", "nose_top", "nose_lower", "eyelid_left",
                   "eyelid_right", "pitch_offset_deg", "pan_max_deg", "tilt_max_deg",
                   "lid_area_min", "lid_area_max"}, "face_geometry")
        d = default_config()
        kwargs["face"] = FaceGeometryConfig(
            left_eye=tuple(f.get("left_eye", d.left_eye)),
            right_eye=tuple(f.get("right_eye", d.right_eye)),
            nose_top=int(f.get("nose_top", d.nose_top)),
            nose_lower=int(f.get("nose_lower", d.nose_lower)),
            eyelid_left=tuple(f.get("eyelid_left", d.eyelid_left)),
            eyelid_right=tuple(f.get("eyelid_right", d.eyelid_right)),
            pitch_offset=_rad(f["pitch_offset_deg"]) if "pitch_offset_deg" in f
            else d.pitch_offset,
            pan_max=_rad(f.get("pan_max_deg", math.degrees(d.pan_max))),
            tilt_max=_rad(f.get("tilt_max_deg", math.degrees(d.tilt_max))),
            lid_area=(float(f.get("lid_area_min", d.lid_area[0])),
                      float(f.get("lid_area_max", d.lid_area[1]))))
    if "broker" in raw:
        kwargs["broker"] = parse_address(str(raw["broker"]))
    if "batch" in raw:
        kwargs["batch"] = bool(raw["batch"])
    if "settle_tail_s" in raw:
        kwargs["settle_tail_s"] = float(raw["settle_tail_s"])
    if "joint_state_stride" in raw:
        kwargs["joint_state_stride"] = max(1, int(raw["joint_state_stride"]))
    return replace(cfg, **kwargs)


def load_config(path) -> PipelineConfig:
    p = pathlib.Path(path)
    try:
        raw = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load config {p}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(raw, base=p.resolve().parent)
