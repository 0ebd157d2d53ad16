"""Perfect-maze gridworld, egocentric observations, oracle policies and
sub-trajectory datasets."""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .dsl.values import GRID_SIZE, HEADINGS, Action, Cell, Observation


class EnvError(Exception):
    pass


class InvalidDimensions(EnvError):
    pass


class EmptyDataset(EnvError):
    pass


@dataclass(frozen=True)
class Maze:
    width: int
    height: int
    cells: tuple  # cells[y][x], y grows northwards
    start: tuple
    goal: tuple
    seed: int

    def cell(self, x: int, y: int) -> Cell:
        if 0 <= x < self.width and 0 <= y < self.height:
            return self.cells[y][x]
        return Cell.WALL

    def is_open(self, x: int, y: int) -> bool:
        return self.cell(x, y) is not Cell.WALL

    def open_cells(self) -> list:
        return [
            (x, y)
            for y in range(self.height)
            for x in range(self.width)
            if self.cells[y][x] is not Cell.WALL
        ]

    def neighbours(self, x: int, y: int) -> list:
        return [
            (x + dx, y + dy) for dx, dy in HEADINGS if self.is_open(x + dx, y + dy)
        ]

    def render(self) -> str:
        chars = {Cell.WALL: "#", Cell.EMPTY: ".", Cell.GOAL: "G"}
        rows = []
        for y in reversed(range(self.height)):
            row = "".join(
                "S" if (x, y) == self.start else chars[self.cells[y][x]]
                for x in range(self.width)
            )
            rows.append(row)
        return "\n".join(rows)


@dataclass(frozen=True)
class AgentPose:
    position: tuple
    heading: int = 0


def _bfs_distances(maze_open: Callable[[int, int], bool], source: tuple) -> dict:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x, y = queue.popleft()
        for dx, dy in HEADINGS:
            nxt = (x + dx, y + dy)
            if nxt not in dist and maze_open(*nxt):
                dist[nxt] = dist[(x, y)] + 1
                queue.append(nxt)
    return dist


def generate_maze(width: int, height: int, seed: int) -> Maze:
    """Carve a perfect maze with a randomized depth-first backtracker.

    Rooms live on odd coordinates; the start is room (1, 1) and the goal is
    the open cell farthest from it by path length.
    """
    if width < 5 or height < 5 or width % 2 == 0 or height % 2 == 0:
        raise InvalidDimensions(f"width and height must be odd and >= 5, got {width}x{height}")
    rng = random.Random(seed)
    grid = [[Cell.WALL] * width for _ in range(height)]
    start = (1, 1)
    grid[1][1] = Cell.EMPTY
    stack = [start]
    while stack:
        x, y = stack[-1]
        options = [
            (dx, dy)
            for dx, dy in HEADINGS
            if 0 < x + 2 * dx < width - 1
            and 0 < y + 2 * dy < height - 1
            and grid[y + 2 * dy][x + 2 * dx] is Cell.WALL
        ]
        if not options:
            stack.pop()
            continue
        dx, dy = rng.choice(options)
        grid[y + dy][x + dx] = Cell.EMPTY
        grid[y + 2 * dy][x + 2 * dx] = Cell.EMPTY
        stack.append((x + 2 * dx, y + 2 * dy))

    def is_open(x, y):
        return 0 <= x < width and 0 <= y < height and grid[y][x] is not Cell.WALL

    dist = _bfs_distances(is_open, start)
    goal = max(dist, key=lambda c: (dist[c], c[1], c[0]))
    grid[goal[1]][goal[0]] = Cell.GOAL
    return Maze(width, height, tuple(tuple(row) for row in grid), start, goal, seed)


def turn_left(heading: int) -> int:
    return (heading - 1) % 4


def turn_right(heading: int) -> int:
    return (heading + 1) % 4


def step(maze: Maze, pose: AgentPose, action) -> AgentPose:
    action = Action(action)
    if action is Action.LEFT:
        return AgentPose(pose.position, turn_left(pose.heading))
    if action is Action.RIGHT:
        return AgentPose(pose.position, turn_right(pose.heading))
    dx, dy = HEADINGS[pose.heading]
    x, y = pose.position
    if maze.is_open(x + dx, y + dy):
        return AgentPose((x + dx, y + dy), pose.heading)
    return pose


def local_to_world(pose: AgentPose, lx: int, ly: int) -> tuple:
    fx, fy = HEADINGS[pose.heading]
    rx, ry = HEADINGS[turn_right(pose.heading)]
    x, y = pose.position
    side = lx - 2
    return (x + side * rx + ly * fx, y + side * ry + ly * fy)


def observe(maze: Maze, pose: AgentPose) -> Observation:
    """5x5 window in front of and beside the agent, no occlusion."""
    cells = []
    for ly in range(GRID_SIZE):
        for lx in range(GRID_SIZE):
            cells.append(maze.cell(*local_to_world(pose, lx, ly)))
    return Observation(tuple(cells), pose.heading)


# -- policies ---------------------------------------------------------------

Policy = Callable[[Observation], Action]

AHEAD = (2, 1)
RIGHT_SIDE = (3, 0)
LEFT_SIDE = (1, 0)


def oracle_policy(obs: Observation) -> Action:
    """Memoryless right-hand rule: right if open, else forward, else left.

    On its own this rule can revisit the cell it came from after a right
    turn, so rollouts use :class:`WallFollower`, which commits to a forward
    move after every right turn.
    """
    if obs.at(*RIGHT_SIDE) is not Cell.WALL:
        return Action.RIGHT
    if obs.at(*AHEAD) is not Cell.WALL:
        return Action.FORWARD
    return Action.LEFT


class WallFollower:
    """Right-hand wall follower for turn-in-place agents.

    Identical to :func:`oracle_policy` except that the step after a right
    turn is always a forward move into the opening that caused the turn.
    """

    def __init__(self):
        self.reset()

    def reset(self):
        self._turned_right = False

    def __call__(self, obs: Observation) -> Action:
        if self._turned_right and obs.at(*AHEAD) is not Cell.WALL:
            action = Action.FORWARD
        else:
            action = oracle_policy(obs)
        self._turned_right = action is Action.RIGHT
        return action


class ShortestPathPolicy:
    """Follows the unique tree path to the goal; needs the true pose."""

    pose_aware = True

    def __init__(self, maze: Maze):
        self.maze = maze
        self._dist = _bfs_distances(maze.is_open, maze.goal)

    def reset(self):
        pass

    def act(self, pose: AgentPose) -> Action:
        x, y = pose.position
        here = self._dist[(x, y)]
        for offset, action in ((0, Action.FORWARD), (1, Action.RIGHT), (3, Action.LEFT), (2, Action.RIGHT)):
            dx, dy = HEADINGS[(pose.heading + offset) % 4]
            if self._dist.get((x + dx, y + dy), here) < here:
                return action
        return Action.FORWARD


class RandomPolicy:
    """Uniformly random actions from a seeded stream."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.reset()

    def reset(self):
        self._rng = random.Random(self.seed)

    def __call__(self, obs: Observation) -> Action:
        return self._rng.choice((Action.LEFT, Action.RIGHT, Action.FORWARD))


POLICIES = ("wall-follower", "shortest-path", "random", "memoryless-wall-follower")


def make_policy(name: str, maze: Maze, seed: int = 0):
    if name == "wall-follower":
        return WallFollower()
    if name == "memoryless-wall-follower":
        return oracle_policy
    if name == "shortest-path":
        return ShortestPathPolicy(maze)
    if name == "random":
        return RandomPolicy(seed)
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICIES}")


def rollout(maze: Maze, start: AgentPose, policy, max_steps: int) -> list:
    """Observe, act, step until the goal is reached or ``max_steps`` pairs."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if hasattr(policy, "reset"):
        policy.reset()
    pose = start
    pairs = []
    while len(pairs) < max_steps and pose.position != maze.goal:
        obs = observe(maze, pose)
        if getattr(policy, "pose_aware", False):
            action = policy.act(pose)
        else:
            action = Action(policy(obs))
        pairs.append((obs, action))
        pose = step(maze, pose, action)
    return pairs


def final_pose(maze: Maze, start: AgentPose, pairs: Sequence) -> AgentPose:
    pose = start
    for _, action in pairs:
        pose = step(maze, pose, action)
    return pose


# -- datasets ---------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    sequence_length: int
    trajectories: tuple  # tuple of tuples of (Observation, Action)
    source_policy: str = "unknown"
    maze_seeds: tuple = ()

    def __len__(self):
        return len(self.trajectories)

    def to_dict(self) -> dict:
        return {
            "sequence_length": self.sequence_length,
            "source_policy": self.source_policy,
            "maze_seeds": list(self.maze_seeds),
            "trajectories": [
                [
                    {"grid": obs.to_codes(), "heading": obs.heading, "action": action.value}
                    for obs, action in traj
                ]
                for traj in self.trajectories
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dataset":
        trajs = []
        for traj in data["trajectories"]:
            pairs = []
            for pair in traj:
                grid = pair["grid"]
                if isinstance(grid, list):
                    grid = "".join(grid)
                pairs.append((Observation.from_codes(grid, int(pair["heading"])), Action(pair["action"])))
            trajs.append(tuple(pairs))
        length = int(data["sequence_length"])
        if any(len(t) != length for t in trajs):
            raise EnvError("trajectory length does not match sequence_length")
        return cls(length, tuple(trajs), data.get("source_policy", "unknown"), tuple(data.get("maze_seeds", ())))


def save_dataset(dataset: Dataset, path, extra: dict | None = None) -> None:
    payload = dataset.to_dict()
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"), sort_keys=True)
        fh.write("\n")


def load_dataset(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return Dataset.from_dict(json.load(fh))


def slice_dataset(
    episodes: Sequence[Sequence],
    sequence_length: int,
    count: int,
    seed: int,
    source_policy: str = "unknown",
    maze_seeds: Iterable[int] = (),
) -> Dataset:
    """Cut episodes into non-overlapping windows, shuffle, keep ``count``."""
    if sequence_length < 1:
        raise ValueError("sequence_length must be >= 1")
    if not episodes:
        raise EmptyDataset("no episodes given")
    windows = []
    for episode in episodes:
        n = len(episode) // sequence_length
        for i in range(n):
            windows.append(tuple(episode[i * sequence_length:(i + 1) * sequence_length]))
    if not windows:
        raise EmptyDataset(f"no window of length {sequence_length} in the episodes")
    random.Random(seed).shuffle(windows)
    return Dataset(sequence_length, tuple(windows[:count]), source_policy, tuple(maze_seeds))


@dataclass(frozen=True)
class EnvSpec:
    """Recipe for the episode pool the curriculum slices its datasets from."""

    width: int = 15
    height: int = 15
    maze_seeds: tuple = (1, 2, 3, 4, 5)
    policy: str = "wall-follower"
    count: int = 50
    max_steps: int = 2000
    slice_seed: int = 0
    start_heading: int = 0
    episodes: tuple = field(default=(), compare=False, repr=False)

    def build_episodes(self) -> list:
        episodes = []
        for seed in self.maze_seeds:
            maze = generate_maze(self.width, self.height, seed)
            policy = make_policy(self.policy, maze, seed)
            pose = AgentPose(maze.start, self.start_heading)
            episodes.append(rollout(maze, pose, policy, self.max_steps))
        return episodes

    def dataset_provider(self) -> Callable[[int], Dataset | None]:
        episodes = list(self.episodes) or self.build_episodes()

        def provide(length: int) -> Dataset | None:
            try:
                return slice_dataset(
                    episodes, length, self.count, self.slice_seed + length,
                    self.policy, self.maze_seeds,
                )
            except EmptyDataset:
                return None

        return provide
