"""Strict INI-style scenario configuration.

Every section and key must be known; lists are comma separated.  Values are SI.
"""
import configparser
from importlib import resources
from pathlib import Path

import numpy as np

from .admittance import AdmittanceParams
from .baselines import InvarianceBaselineConfig
from .dynamics import SingleLinkModel, TwoLinkModel
from .errors import ConfigRejected
from .safety import ConstraintSpec
from .simkit.profiles import ForceProfile
from .simkit.scenario import DisturbanceConfig, ObserverConfig, Scenario

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def _float(s):
    return float(s)


def _floats(s):
    return tuple(float(x) for x in s.replace(";", ",").split(",") if x.strip())


def _bool(s):
    try:
        return _BOOL[s.strip().lower()]
    except KeyError:
        raise ValueError(f"not a boolean: {s!r}") from None


def _int(s):
    return int(s)


def _str(s):
    return s.strip()


# section -> key -> (parser, required)
SCHEMA = {
    "scenario": {
        "name": (_str, False), "model": (_str, True), "controller": (_str, False),
        "dt": (_float, False), "duration": (_float, False), "seed": (_int, False),
        "error_channel": (_str, False),
    },
    "two_link": {"m1": (_float, True), "m2": (_float, True), "l1": (_float, True), "l2": (_float, True)},
    "single_link": {"J_eq": (_float, True), "B_eq": (_float, True), "A_m": (_float, True), "l": (_float, True)},
    "admittance": {"mass": (_floats, True), "damping": (_floats, True), "stiffness": (_floats, True)},
    "reference": {
        "compliant_stiffness": (_floats, False), "compliant_damping": (_floats, False),
        "compliant_from_admittance": (_bool, False),
        "safe_stiffness": (_floats, True), "safe_damping": (_floats, True),
    },
    "adaptation": {
        "rate": (_floats, True), "offset_position": (_floats, False), "offset_velocity": (_floats, False),
        "published_P": (_floats, False),
    },
    "constraints": {
        "desired": (_floats, True), "bound": (_floats, True), "bound_amplitude": (_floats, False),
        "bound_frequency": (_floats, False), "mismatch": (_float, True), "force_bound": (_float, True),
        "hysteresis": (_float, False), "activation_band": (_float, False), "dwell": (_float, False),
    },
    "force": {
        "amplitude": (_floats, True), "breakpoints": (_floats, False), "ramp_rate": (_float, False),
        "smooth": (_bool, False),
    },
    "disturbance": {
        "enabled": (_bool, True), "sine_amplitude": (_float, False), "sine_frequency": (_float, False),
        "random_amplitude": (_float, False), "start": (_float, False), "end": (_float, False),
        "sample_period": (_float, False),
    },
    "observer": {
        "enabled": (_bool, True), "gain": (_float, False), "velocity_noise": (_float, False),
        "noise_period": (_float, False),
    },
    "baseline": {"gamma": (_float, False)},
}

REQUIRED_SECTIONS = {
    "two_link": ("scenario", "two_link", "admittance", "reference", "adaptation", "constraints", "force"),
    "single_link": ("scenario", "single_link", "admittance", "reference", "adaptation", "constraints", "force"),
}


def _parse_text(text, source="<string>"):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigRejected(f"{source}: {exc}") from exc
    out = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigRejected(f"{source}: unknown section [{section}]")
        keys = SCHEMA[section]
        parsed = {}
        for key, raw in cp.items(section):
            if key not in keys:
                raise ConfigRejected(f"{source}: unknown key '{key}' in [{section}]")
            try:
                parsed[key] = keys[key][0](raw)
            except ValueError as exc:
                raise ConfigRejected(f"{source}: bad value for {section}.{key}: {exc}") from None
        for key, (_, required) in keys.items():
            if required and key not in parsed:
                raise ConfigRejected(f"{source}: missing required key '{key}' in [{section}]")
        out[section] = parsed
    return out


def _vec(x, m, what):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape[0] == 1 and m > 1:
        x = np.full(m, x[0])
    if x.shape[0] != m:
        raise ConfigRejected(f"{what} needs {m} entries, got {x.shape[0]}")
    return x


def scenario_from_dict(cfg, source="<config>"):
    sc = cfg.get("scenario")
    if sc is None:
        raise ConfigRejected(f"{source}: missing [scenario] section")
    model = sc["model"]
    if model not in REQUIRED_SECTIONS:
        raise ConfigRejected(f"{source}: unknown model {model!r}")
    for sec in REQUIRED_SECTIONS[model]:
        if sec not in cfg:
            raise ConfigRejected(f"{source}: missing [{sec}] section for model {model}")
    m = 2 if model == "two_link" else 1
    try:
        plant = TwoLinkModel(**cfg["two_link"]) if model == "two_link" else SingleLinkModel(**cfg["single_link"])
        adm = cfg["admittance"]
        admittance = AdmittanceParams.diagonal(_vec(adm["mass"], m, "mass"), _vec(adm["damping"], m, "damping"),
                                               _vec(adm["stiffness"], m, "stiffness"))
        ref = cfg["reference"]
        from_adm = ref.get("compliant_from_admittance", False)
        if not from_adm and ("compliant_stiffness" not in ref or "compliant_damping" not in ref):
            raise ConfigRejected(f"{source}: [reference] needs compliant_stiffness and compliant_damping")
        compliant = (None, None) if from_adm else (_vec(ref["compliant_stiffness"], m, "compliant_stiffness"),
                                                   _vec(ref["compliant_damping"], m, "compliant_damping"))
        safe = (_vec(ref["safe_stiffness"], m, "safe_stiffness"), _vec(ref["safe_damping"], m, "safe_damping"))
        ad = cfg["adaptation"]
        offset = np.zeros((m, 2 * m))
        offset[:, :m] = np.diag(_vec(ad.get("offset_position", (0.0,)), m, "offset_position"))
        offset[:, m:] = np.diag(_vec(ad.get("offset_velocity", (0.0,)), m, "offset_velocity"))
        pub = ad.get("published_P")
        con = cfg["constraints"]
        spec = ConstraintSpec(
            offset=_vec(con["bound"], m, "bound"),
            desired=_vec(con["desired"], m, "desired"),
            amplitude=_vec(con.get("bound_amplitude", (0.0,)), m, "bound_amplitude"),
            frequency=_vec(con.get("bound_frequency", (0.0,)), m, "bound_frequency"),
            hysteresis=con.get("hysteresis", 0.02),
            activation_band=con.get("activation_band", 0.05),
            dwell=con.get("dwell", 0.05),
        )
        fc = cfg["force"]
        force = ForceProfile(amplitude=tuple(_vec(fc["amplitude"], m, "force amplitude")),
                             breakpoints=fc.get("breakpoints", (10.0, 11.0, 20.0, 21.0)),
                             ramp_rate=fc.get("ramp_rate", 0.3), smooth=fc.get("smooth", False))
        dist = DisturbanceConfig(**cfg.get("disturbance", {}))
        obs = ObserverConfig(**cfg.get("observer", {}))
        base = InvarianceBaselineConfig(gamma_b=cfg.get("baseline", {}).get("gamma", -5.0))
        return Scenario(
            name=sc.get("name", Path(source).stem),
            model=model, plant=plant, admittance=admittance,
            compliant=compliant, safe=safe, constraints=spec, force=force,
            mismatch=con["mismatch"], force_bound=con["force_bound"],
            adaptation_rate=tuple(_vec(ad["rate"], m, "adaptation rate")),
            gain_offset=offset, disturbance=dist, observer=obs, baseline=base,
            controller=sc.get("controller", "proposed"),
            dt=sc.get("dt", 1e-3), duration=sc.get("duration", 30.0), seed=sc.get("seed"),
            error_channel=sc.get("error_channel", "axis:1"),
            published_P=None if pub is None else np.asarray(pub).reshape(2, 2) if len(pub) == 4 else np.asarray(pub),
            compliant_is_admittance=from_adm,
        )
    except ConfigRejected:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigRejected(f"{source}: {exc}") from exc


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigRejected(f"cannot read {path}: {exc}") from exc
    return scenario_from_dict(_parse_text(text, str(path)), str(path))


def loads_scenario(text, source="<string>"):
    return scenario_from_dict(_parse_text(text, source), source)


def bundled_config(name):
    """Path to a config shipped with the package, e.g. 'two_link_paper.cfg'."""
    ref = resources.files("safeadmit") / "configs" / name
    if not ref.is_file():
        raise FileNotFoundError(name)
    return Path(str(ref))


def load_bundled(name):
    return load_scenario(bundled_config(name))
