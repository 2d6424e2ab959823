"""Plain-text ``key = value`` configuration files and parameter sidecars.

Lines are ``key = value`` (or ``key: value``); blank lines and lines
starting with ``#`` are ignored. Keys are case-sensitive and dashes are
read as underscores, so ``beta-on`` and ``beta_on`` name the same setting.
"""

import math

from .errors import ConfigurationError, ImageIOError


def normalise_key(key):
    return key.strip().replace("-", "_")


def parse_config(text, source="<config>"):
    """Parse config text into an ordered ``{key: raw string}`` dict."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key = normalise_key(key)
        if not key:
            raise ConfigurationError(f"{source}:{lineno}: empty key")
        values[key] = value.strip()
    return values


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ImageIOError(f"{path}: cannot read config ({exc})") from exc
    return parse_config(text, source=str(path))


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if value is None:
        return "none"
    return str(value)


def format_params(params):
    """Render ``params`` as sorted ``key = value`` lines (deterministic)."""
    return "".join(f"{k} = {format_value(params[k])}\n" for k in sorted(params))


def write_sidecar(path, params):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(format_params(params))
    except OSError as exc:
        raise ImageIOError(f"{path}: cannot write parameter record ({exc})") from exc
