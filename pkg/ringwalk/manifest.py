"""Run configuration and the manifest recorded next to command outputs."""
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import attr
from attr.validators import deep_iterable, instance_of, optional
import yaml

from . import __version__

THREADS_ENV = "RINGWALK_THREADS"


def scan_threads() -> int:
    """Worker count for parallel scans, capped by ``RINGWALK_THREADS`` when set."""
    default = os.cpu_count() or 1
    try:
        value = int(os.environ.get(THREADS_ENV, ""))
    except ValueError:
        return default
    return value if value >= 1 else default


@attr.s(slots=True)
class RunManifest:
    """What a command read, how it was parameterised, and what it wrote."""

    command: str = attr.ib(validator=instance_of(str))
    inputs: List[str] = attr.ib(
        factory=list, validator=deep_iterable(instance_of(str), instance_of(list))
    )
    parameters: Dict[str, Any] = attr.ib(factory=dict, validator=instance_of(dict))
    outputs: List[str] = attr.ib(
        factory=list, validator=deep_iterable(instance_of(str), instance_of(list))
    )
    seed: Optional[int] = attr.ib(None, validator=optional(instance_of(int)))
    version: str = attr.ib(__version__, validator=instance_of(str))

    def as_dict(self) -> Dict[str, Any]:
        return attr.asdict(self, recurse=False)

    def dump(self) -> str:
        return yaml.dump(self.as_dict(), sort_keys=False, default_flow_style=False)

    def write(self, path: Union[str, Path], encoding: str = "utf8") -> None:
        Path(path).write_text(self.dump(), encoding=encoding)


def load_manifest(path: Union[str, Path], encoding: str = "utf8") -> RunManifest:
    with Path(path).open(encoding=encoding) as handle:
        data = yaml.safe_load(handle)
    return RunManifest(**data)
