"""
On-disk document models for instances, deadline assignments and schedules
"""
from fractions import Fraction
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, ValidationInfo, field_validator

InfLiteral = Literal["inf"]
MachineEntry = Union[StrictInt, InfLiteral]
DeadlineEntry = Union[StrictInt, InfLiteral]


class JobDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    p: StrictInt = Field(ge=1)
    r: StrictInt = Field(ge=0)
    w: StrictInt = Field(ge=1)


class InstanceDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    jobs: List[JobDocument] = Field(min_length=1)
    machines: Optional[List[List[MachineEntry]]] = None

    @field_validator("machines")
    @classmethod
    def check_machines(cls, machines, info: ValidationInfo):
        if machines is None:
            return machines
        if not machines:
            raise ValueError("machine matrix needs at least one row")
        jobs = info.data.get("jobs") or []
        for i, row in enumerate(machines):
            if len(row) != len(jobs):
                raise ValueError(f"machine row {i} has {len(row)} entries, expected {len(jobs)}")
            for j, entry in enumerate(row):
                if entry != "inf" and entry < 1:
                    raise ValueError(f"machine row {i}, job {j}: processing time must be >= 1")
            if all(entry == "inf" for entry in row):
                raise ValueError(f"machine row {i} is all inf")
        for j in range(len(jobs)):
            if all(row[j] == "inf" for row in machines):
                raise ValueError(f"job {j} has no finite machine entry")
        return machines


class DeadlineDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    d: List[DeadlineEntry]

    @field_validator("d")
    @classmethod
    def check_deadlines(cls, values):
        for k, entry in enumerate(values):
            if entry != "inf" and entry < 0:
                raise ValueError(f"deadline {k} must be >= 0")
        return values


class SlotDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m: StrictInt = Field(ge=0)
    a: str
    b: str
    j: StrictInt = Field(ge=0)

    @field_validator("a", "b")
    @classmethod
    def check_time(cls, value: str) -> str:
        try:
            Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not an exact time value: {value!r}")
        return value


class ScheduleDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    slots: List[SlotDocument]
