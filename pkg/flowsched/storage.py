"""
Read and write instances, deadline assignments and schedules.

Documents are UTF-8 JSON. Writers emit one canonical layout, so
`write(read(write(x))) == write(x)` byte for byte.
"""
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from .documents import DeadlineDocument, InstanceDocument, ScheduleDocument
from .errors import InstanceFormatError
from .models import INF, DeadlineAssignment, Instance, Schedule, Slot

logger = logging.getLogger(__name__)

Source = Union[bytes, str]
DocumentT = TypeVar("DocumentT", bound=BaseModel)


def _location(loc: Sequence) -> str:
    text = ""
    for part in loc:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text += f".{part}" if text else str(part)
    return text or "document"


def _parse(data: Source, model: Type[DocumentT]) -> DocumentT:
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(e.msg, f"line {e.lineno}:{e.colno}") from e
    except UnicodeDecodeError as e:
        raise InstanceFormatError(f"not UTF-8: {e.reason}", f"byte {e.start}") from e
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise InstanceFormatError(first["msg"], _location(first["loc"])) from e


def _dump(payload: dict) -> bytes:
    return (json.dumps(payload, indent=2) + "\n").encode("utf-8")


def read_instance(data: Source) -> Instance:
    document = _parse(data, InstanceDocument)
    machines = None
    if document.machines is not None:
        machines = [[INF if entry == "inf" else entry for entry in row] for row in document.machines]
    instance = Instance.from_jobs([(job.p, job.r, job.w) for job in document.jobs], machines)
    logger.debug(f"read instance n={instance.n} m={instance.m} T={instance.horizon}")
    return instance


def write_instance(instance: Instance) -> bytes:
    payload = {"jobs": [{"p": job.p, "r": job.r, "w": job.w} for job in instance.by_id]}
    if instance.machines is not None:
        payload["machines"] = [["inf" if value == INF else value for value in row]
                               for row in instance.machines]
    return _dump(payload)


def read_deadlines(data: Source, n: Optional[int] = None) -> DeadlineAssignment:
    document = _parse(data, DeadlineDocument)
    if n is not None and len(document.d) != n:
        raise InstanceFormatError(f"expected {n} deadlines, got {len(document.d)}", "d")
    return DeadlineAssignment(tuple(INF if entry == "inf" else entry for entry in document.d))


def write_deadlines(deadlines: DeadlineAssignment) -> bytes:
    return _dump({"d": ["inf" if value == INF else value for value in deadlines.d]})


def read_schedule(data: Source) -> Schedule:
    document = _parse(data, ScheduleDocument)
    return Schedule(tuple(Slot(slot.m, Fraction(slot.a), Fraction(slot.b), slot.j)
                          for slot in document.slots))


def write_schedule(schedule: Schedule) -> bytes:
    return _dump({"slots": [{"m": slot.machine, "a": str(slot.start), "b": str(slot.end), "j": slot.job}
                            for slot in schedule.slots]})


def load_instance(path: Union[str, Path]) -> Instance:
    try:
        return read_instance(Path(path).read_bytes())
    except OSError as e:
        logger.error(f"❌ Cannot read instance {path}: {e}")
        raise InstanceFormatError(str(e), str(path)) from e


def load_deadlines(path: Union[str, Path], n: Optional[int] = None) -> DeadlineAssignment:
    try:
        return read_deadlines(Path(path).read_bytes(), n)
    except OSError as e:
        logger.error(f"❌ Cannot read deadlines {path}: {e}")
        raise InstanceFormatError(str(e), str(path)) from e


def load_schedule(path: Union[str, Path]) -> Schedule:
    try:
        return read_schedule(Path(path).read_bytes())
    except OSError as e:
        logger.error(f"❌ Cannot read schedule {path}: {e}")
        raise InstanceFormatError(str(e), str(path)) from e
