from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from lib.errors import ConfigError
from lib.skills import EntityKind


class RobotSpec(BaseModel):
    token: str
    mobile: bool = True
    hand_capacity: int = Field(default=1, ge=1)
    start: str = Field(..., description="Initial navpoint")


class ObjectSpec(BaseModel):
    token: str
    place: str


class ContainerSpec(BaseModel):
    token: str
    open: bool = False


class DeviceSpec(BaseModel):
    token: str
    destructive: bool = Field(default=False, description="Objects released here leave the world")


class PerturbationKind(str, Enum):
    CLOSE = "close"
    MOVE = "move"


class PerturbationEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: int = Field(..., ge=0, description="Loop step index that triggers the event")
    effect: PerturbationKind
    target: str
    place: str | None = None

    @model_validator(mode="after")
    def _move_needs_place(self) -> "PerturbationEvent":
        if self.effect == PerturbationKind.MOVE and not self.place:
            raise ValueError("move perturbation requires a place")
        return self


class WorldConfig(BaseModel):
    name: str = "world"
    objects: list[ObjectSpec] = Field(default_factory=list)
    containers: list[ContainerSpec] = Field(default_factory=list)
    spaces: list[str] = Field(default_factory=list)
    devices: list[DeviceSpec] = Field(default_factory=list)
    navpoints: list[str] = Field(default_factory=list)
    robots: list[RobotSpec] = Field(default_factory=list)
    perturbations: list[PerturbationEvent] = Field(default_factory=list)

    @property
    def container_tokens(self) -> list[str]:
        return [c.token for c in self.containers]

    @property
    def places(self) -> list[str]:
        """spaces, containers, then devices that are not containers"""
        seen = list(self.spaces) + self.container_tokens
        return seen + [d.token for d in self.devices if d.token not in seen]

    @property
    def object_tokens(self) -> list[str]:
        return [o.token for o in self.objects]

    @property
    def robot_tokens(self) -> list[str]:
        return [r.token for r in self.robots]

    def robot(self, token: str) -> RobotSpec | None:
        return next((r for r in self.robots if r.token == token), None)

    def is_container(self, token: str) -> bool:
        return token in self.container_tokens

    def is_space(self, token: str) -> bool:
        return token in self.spaces

    def is_destructive(self, token: str) -> bool:
        return any(d.token == token and d.destructive for d in self.devices)

    def kinds_of(self, token: str) -> set[EntityKind]:
        kinds: set[EntityKind] = set()
        if token in self.robot_tokens:
            kinds.add(EntityKind.ROBOT)
        if token in self.object_tokens:
            kinds.add(EntityKind.OBJECT)
        if token in self.spaces:
            kinds.add(EntityKind.SPACE)
        if self.is_container(token):
            kinds.add(EntityKind.CONTAINER)
        if any(d.token == token for d in self.devices):
            kinds.add(EntityKind.DEVICE)
        if token in self.navpoints:
            kinds.add(EntityKind.NAVPOINT)
        return kinds

    def accepts(self, token: str, kind: EntityKind) -> bool:
        """whether token can fill a skill parameter of the given kind"""
        kinds = self.kinds_of(token)
        if kind == EntityKind.SPACE:
            # release and pick targets may be any place
            return token in self.places
        return kind in kinds

    def check_references(self) -> None:
        """raise ConfigError naming the first dangling or clashing reference"""
        owners: dict[str, str] = {}
        for kind, tokens in (
            ("robot", self.robot_tokens),
            ("object", self.object_tokens),
            ("place", self.places),
        ):
            for token in tokens:
                if token in owners:
                    raise ConfigError(
                        f"token '{token}' is declared as both {owners[token]} and {kind}",
                        detail={"token": token},
                    )
                owners[token] = kind

        places = set(self.places)
        for navpoint in self.navpoints:
            if navpoint not in places:
                raise ConfigError(
                    f"navpoint '{navpoint}' does not name a place", detail={"token": navpoint}
                )
        for obj in self.objects:
            if obj.place not in places:
                raise ConfigError(
                    f"object '{obj.token}' references missing place '{obj.place}'",
                    detail={"token": obj.place},
                )
        for robot in self.robots:
            if robot.start not in self.navpoints:
                raise ConfigError(
                    f"robot '{robot.token}' references missing navpoint '{robot.start}'",
                    detail={"token": robot.start},
                )
        for event in self.perturbations:
            target_ok = (
                event.target in self.container_tokens
                if event.effect == PerturbationKind.CLOSE
                else event.target in self.object_tokens
            )
            if not target_ok:
                raise ConfigError(
                    f"perturbation at step {event.step} references missing '{event.target}'",
                    detail={"token": event.target},
                )
            if event.place is not None and event.place not in places:
                raise ConfigError(
                    f"perturbation at step {event.step} references missing place '{event.place}'",
                    detail={"token": event.place},
                )

    def with_overrides(
        self,
        placements: dict[str, str] | None = None,
        open_containers: list[str] | None = None,
        robot_starts: dict[str, str] | None = None,
        perturbations: list[PerturbationEvent] | None = None,
    ) -> "WorldConfig":
        data: dict[str, Any] = self.model_dump()
        for obj in data["objects"]:
            if placements and obj["token"] in placements:
                obj["place"] = placements[obj["token"]]
        for container in data["containers"]:
            if open_containers and container["token"] in open_containers:
                container["open"] = True
        for robot in data["robots"]:
            if robot_starts and robot["token"] in robot_starts:
                robot["start"] = robot_starts[robot["token"]]
        data["perturbations"].extend(e.model_dump() for e in perturbations or [])
        return WorldConfig.model_validate(data)


class WorldState(BaseModel):
    locations: dict[str, str] = Field(
        default_factory=dict, description="object -> place token, or robot token when held"
    )
    open: dict[str, bool] = Field(default_factory=dict)
    positions: dict[str, str] = Field(default_factory=dict)
    hands: dict[str, list[str]] = Field(default_factory=dict, description="oldest grasp first")
    removed: list[str] = Field(default_factory=list)
    step: int = 0


class FeedbackStatus(str, Enum):
    OK = "Ok"
    ERR = "Err"


class FeedbackKind(str, Enum):
    NOT_AT_LOCATION = "NotAtLocation"
    CONTAINER_CLOSED = "ContainerClosed"
    CONTAINER_OPEN = "ContainerOpen"
    HAND_FULL = "HandFull"
    HAND_EMPTY = "HandEmpty"
    OBJECT_NOT_VISIBLE = "ObjectNotVisible"
    IMMOBILE_ROBOT = "ImmobileRobot"
    UNKNOWN_ENTITY = "UnknownEntity"
    MALFORMED_ACTION = "MalformedAction"


class Feedback(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: FeedbackStatus
    kind: FeedbackKind | None = None
    message: str = ""

    @model_validator(mode="after")
    def _kind_matches_status(self) -> "Feedback":
        if self.status == FeedbackStatus.OK and self.kind is not None:
            raise ValueError("Ok feedback carries no error kind")
        if self.status == FeedbackStatus.ERR and self.kind is None:
            raise ValueError("Err feedback needs an error kind")
        return self

    @property
    def ok(self) -> bool:
        return self.status == FeedbackStatus.OK

    @classmethod
    def success(cls, message: str) -> "Feedback":
        return cls(status=FeedbackStatus.OK, message=message)

    @classmethod
    def error(cls, kind: FeedbackKind, message: str) -> "Feedback":
        return cls(status=FeedbackStatus.ERR, kind=kind, message=message)


class ObservedFact(BaseModel):
    model_config = ConfigDict(frozen=True)

    entity: str
    place: str
    attribute: str = Field(
        ..., description="'on' for spaces, 'in' for containers, 'held' for hands"
    )


class RawObservation(BaseModel):
    robot: str
    position: str
    facts: list[ObservedFact] = Field(default_factory=list)
    container_flags: dict[str, bool] = Field(default_factory=dict)
    step: int = 0
