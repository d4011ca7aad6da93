import dataclasses
import inspect
from collections.abc import Mapping
from typing import Any

import numpy as np

_ENCODABLE_FLAG = "__replicoal_json_encodable__"


def json_encodable[T: type](cls: T) -> T:
    """
    Class decorator to indicate compatibility with ``json_default``.

    An instance encodes as a JSON object holding its fields and ``@property`` values,
    except those starting with '_'.
    Mappings among them may be keyed by block-count tuples; such a key ``(2, 1)`` becomes ``"2,1"``.
    """
    setattr(cls, _ENCODABLE_FLAG, True)
    return cls


def _json_key(key: Any) -> str:
    if isinstance(key, tuple):
        return ",".join(str(v) for v in key)
    return str(key)


def _plain(val: Any) -> Any:
    if isinstance(val, Mapping):
        return {_json_key(k): _plain(v) for k, v in val.items()}
    return val


def _members(obj: Any) -> dict[str, Any]:
    if dataclasses.is_dataclass(obj):
        names = [f.name for f in dataclasses.fields(obj)]
    else:
        names = list(vars(obj))
    d = {name: _plain(getattr(obj, name)) for name in names if name[:1] != "_"}
    for name, prop in inspect.getmembers(type(obj), lambda m: isinstance(m, property)):
        if name[:1] != "_" and prop.fget:
            d[name] = _plain(prop.fget(obj))
    return d


def json_default(obj: Any) -> Any:
    """
    Custom JSON encoder, passed as ``json.dumps(default=json_default)``.

    It accepts these types:

    * ``np.ndarray``
    * numpy scalars
    * class decorated with ``json_encodable``
    """
    match obj:
        case np.ndarray():
            return obj.tolist()
        case np.generic():
            return obj.item()
        case _ if getattr(type(obj), _ENCODABLE_FLAG, False) is True:
            return _members(obj)
    raise TypeError(f"cannot encode {type(obj)}")
