"""
Run configuration for cyclenf
INI-style config files with [model], [mesh], [tol], [run] and [lyapunov]
sections; command-line flags override file values
"""

import configparser
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from bvp import CONDITION_LIMIT, KERNEL_RATIO
from collocation import DEFAULT_NCOL, DEFAULT_NTST
from cycle import NEWTON_MAXIT, NEWTON_TOL
from errors import InvalidInput
from locator import LOCATOR_MAXIT, LOCATOR_TOL
from lyapunov import RENORM_DT, STEP, T_TOTAL, T_TRANSIENT, ZERO_THRESHOLD
from normalform import BORDER_TOL

logger = logging.getLogger(__name__)

ORDERS = ('low', 'high')

# file key -> (section, RunConfig field, type)
FILE_KEYS = {
    ('model', 'name'): ('model', str),
    ('mesh', 'ntst'): ('ntst', int),
    ('mesh', 'ncol'): ('ncol', int),
    ('tol', 'newton'): ('newton_tol', float),
    ('tol', 'newton_maxit'): ('newton_maxit', int),
    ('tol', 'criticality'): ('criticality_tol', float),
    ('tol', 'locator'): ('locator_tol', float),
    ('tol', 'locator_maxit'): ('locator_maxit', int),
    ('tol', 'kernel_ratio'): ('kernel_ratio', float),
    ('tol', 'condition_limit'): ('condition_limit', float),
    ('tol', 'border'): ('border_tol', float),
    ('run', 'order'): ('order', str),
    ('run', 'output'): ('output', str),
    ('lyapunov', 't_transient'): ('t_transient', float),
    ('lyapunov', 't_total'): ('t_total', float),
    ('lyapunov', 'renorm_dt'): ('renorm_dt', float),
    ('lyapunov', 'step'): ('step', float),
    ('lyapunov', 'zero_threshold'): ('zero_threshold', float),
}

POSITIVE = ('ntst', 'ncol', 'newton_tol', 'newton_maxit', 'criticality_tol', 'locator_tol', 'locator_maxit',
            'kernel_ratio', 'condition_limit', 'border_tol', 't_transient', 't_total', 'renorm_dt', 'step',
            'zero_threshold')


@dataclass(frozen=True)
class RunConfig:
    model: str = None
    params: dict = field(default_factory=dict)
    ntst: int = DEFAULT_NTST
    ncol: int = DEFAULT_NCOL
    newton_tol: float = NEWTON_TOL
    newton_maxit: int = NEWTON_MAXIT
    criticality_tol: float = 1e-6
    locator_tol: float = LOCATOR_TOL
    locator_maxit: int = LOCATOR_MAXIT
    kernel_ratio: float = KERNEL_RATIO
    condition_limit: float = CONDITION_LIMIT
    border_tol: float = BORDER_TOL
    order: str = 'low'
    output: str = None
    t_transient: float = T_TRANSIENT
    t_total: float = T_TOTAL
    renorm_dt: float = RENORM_DT
    step: float = STEP
    zero_threshold: float = ZERO_THRESHOLD

    def __post_init__(self):
        self.validate()

    def validate(self):
        bad = {name: getattr(self, name) for name in POSITIVE if not getattr(self, name) > 0}
        if bad:
            raise InvalidInput("tolerances and sizes must be positive", **bad)
        if self.order not in ORDERS:
            raise InvalidInput(f"order must be one of {ORDERS}, got '{self.order}'", order=self.order)
        if self.ncol > 7:
            raise InvalidInput("at most 7 collocation points per interval are supported", ncol=self.ncol)
        if self.t_total <= self.t_transient:
            raise InvalidInput("t_total must exceed t_transient", t_total=self.t_total,
                               t_transient=self.t_transient)

    def merged(self, **overrides):
        """Copy with the non-None overrides applied; params are merged by name"""
        overrides = {k: v for k, v in overrides.items() if v is not None}
        params = {**self.params, **overrides.pop('params', {})}
        return replace(self, params=params, **overrides)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def parse_assignments(text):
    """'a=1,b=2' -> {'a': 1.0, 'b': 2.0}"""
    out = {}
    if not text:
        return out
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition('=')
        if not sep or not name.strip():
            raise InvalidInput(f"expected name=value, got '{item}'", item=item)
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise InvalidInput(f"value of '{name.strip()}' is not a number: '{value}'", item=item) from None
    return out


def read_config_file(path):
    """Field overrides from an INI-style file"""
    path = Path(path)
    if not path.exists():
        raise InvalidInput(f"config file not found: {path}", path=str(path))
    parser = configparser.ConfigParser()
    parser.optionxform = str  # parameter names are case sensitive
    try:
        parser.read(path)
    except configparser.Error as e:
        raise InvalidInput(f"malformed config file {path}: {e}", path=str(path)) from None
    values = {}
    params = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            target = FILE_KEYS.get((section, key))
            if target is None and section == 'model':
                try:
                    params[key] = float(raw)
                except ValueError:
                    raise InvalidInput(f"parameter '{key}' is not a number: '{raw}'", path=str(path)) from None
                continue
            if target is None:
                raise InvalidInput(f"unknown config key [{section}] {key}", section=section, key=key)
            name, cast = target
            try:
                values[name] = cast(raw)
            except ValueError:
                raise InvalidInput(f"[{section}] {key} is not a valid {cast.__name__}: '{raw}'",
                                   section=section, key=key) from None
    if params:
        values['params'] = params
    logger.debug("config %s: %s", path, values)
    return values


def load_config(path=None, **overrides):
    """Defaults < file < overrides"""
    config = RunConfig()
    if path:
        config = config.merged(**read_config_file(path))
    return config.merged(**overrides)
