"""Runtime values shared by the interpreter and the maze environment."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

GRID_SIZE = 5


class Cell(str, Enum):
    WALL = "w"
    EMPTY = "e"
    GOAL = "g"


class Action(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    FORWARD = "forward"


#: heading index -> (dx, dy) in world coordinates (x east, y north)
HEADINGS = ((0, 1), (1, 0), (0, -1), (-1, 0))
HEADING_NAMES = ("north", "east", "south", "west")


@dataclass(frozen=True)
class Observation:
    """Egocentric 5x5 view plus the agent heading.

    ``cells`` is flat and row-major over the forward distance: index
    ``y * 5 + x`` where ``x`` is lateral (0 far left .. 4 far right) and
    ``y`` is the distance ahead (0 is the agent's own row). The agent sits
    at ``(2, 0)``.
    """

    cells: tuple
    heading: int = 0

    def __post_init__(self):
        if len(self.cells) != GRID_SIZE * GRID_SIZE:
            raise ValueError(f"expected 25 cells, got {len(self.cells)}")
        if not 0 <= self.heading < 4:
            raise ValueError(f"heading must be in 0..3, got {self.heading}")

    def at(self, x: int, y: int) -> Cell:
        return self.cells[y * GRID_SIZE + x]

    @property
    def grid(self) -> tuple:
        """Nested view indexed ``grid[x][y]``."""
        return tuple(
            tuple(self.cells[y * GRID_SIZE + x] for y in range(GRID_SIZE))
            for x in range(GRID_SIZE)
        )

    def to_codes(self) -> str:
        return "".join(c.value for c in self.cells)

    @classmethod
    def from_codes(cls, codes, heading: int = 0) -> "Observation":
        return cls(tuple(Cell(c) for c in codes), heading)

    @classmethod
    def filled(cls, cell: Cell = Cell.EMPTY, heading: int = 0) -> "Observation":
        return cls((cell,) * (GRID_SIZE * GRID_SIZE), heading)

    def with_cells(self, mapping: dict) -> "Observation":
        cells = list(self.cells)
        for (x, y), cell in mapping.items():
            cells[y * GRID_SIZE + x] = cell
        return Observation(tuple(cells), self.heading)
