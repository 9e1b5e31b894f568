"""
maps.py: Agent-side semantic maps.

    Two views of the same detections are kept:

    * the instantaneous map: per cell, the labels and detection tokens of
      the most recent observation of that cell (last write wins);
    * the vote map: per detection track (the opaque instance token) and
      class, the number of observations that reported that class. Its
      derived view labels the track's latest cell with the strict argmax
      class; ties give no label.

    Lookups search the vote view first and fall back to the instantaneous
    map only when the class is absent there.

"""
import logging
from collections import Counter

import numpy as np

from homestead import world

logger = logging.getLogger('homestead')

UNKNOWN = 0
FREE = 1
OBSTACLE = 2

SUPPLEMENTARY = "M'"
INSTANTANEOUS = 'M'


def is_obstacle_class(object_class, catalog=None):
    """Walls and every non-pickupable catalog class block movement"""
    if object_class == world.WALL_CLASS:
        return True
    catalog = catalog or world.load_catalog()
    known = catalog.get(object_class)
    return known is not None and not known.pickupable


class SemanticMaps:
    def __init__(self, shape):
        self.shape = tuple(shape)
        self.occupancy = np.full(self.shape, UNKNOWN, dtype=np.int8)
        self.explored = np.zeros(self.shape, dtype=bool)
        # Instantaneous map: cell -> [(class, token), ...]
        self.labels = {}
        # Vote map: token -> Counter(class -> count), plus the cell each token was last seen at
        self.votes = {}
        self.track_cells = {}
        self.track_pitch = {}
        self.blocked = set()

    def supplementary_view(self):
        """cell -> {class: [tokens]} from the strict-argmax vote of every located track"""
        view = {}
        for token in sorted(self.track_cells):
            label = self.majority_label(token)
            if label is None:
                continue
            view.setdefault(self.track_cells[token], {}).setdefault(label, []).append(token)
        return view

    def instantaneous_view(self):
        view = {}
        for cell, entries in self.labels.items():
            for object_class, token in entries:
                view.setdefault(cell, {}).setdefault(object_class, []).append(token)
        return view

    def majority_label(self, token):
        counts = self.votes.get(token)
        if not counts:
            return None
        ranked = counts.most_common()
        if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
            return None
        return ranked[0][0]

    def cell_votes(self, cell):
        """Vote totals of every track last seen at cell"""
        totals = Counter()
        for token, track_cell in self.track_cells.items():
            if track_cell == cell:
                totals.update(self.votes[token])
        return totals

    def effective_labels(self, cell, use_supplementary=True, supplementary=None):
        if use_supplementary:
            if supplementary is None:
                supplementary = self.supplementary_view()
            if cell in supplementary:
                return set(supplementary[cell])
        return {object_class for object_class, _ in self.labels.get(cell, [])}

    def known_classes(self, use_supplementary=True):
        classes = set()
        if use_supplementary:
            for labels in self.supplementary_view().values():
                classes.update(labels)
        for entries in self.labels.values():
            classes.update(object_class for object_class, _ in entries)
        classes.discard(world.WALL_CLASS)
        return sorted(classes)

    def relocate(self, token, cell):
        """Move a track the agent itself carried; cell None means held"""
        if cell is None:
            self.track_cells.pop(token, None)
            for entries in self.labels.values():
                entries[:] = [entry for entry in entries if entry[1] != token]
        else:
            self.track_cells[token] = tuple(cell)

    def copy(self):
        duplicate = SemanticMaps(self.shape)
        duplicate.occupancy = self.occupancy.copy()
        duplicate.explored = self.explored.copy()
        duplicate.labels = {cell: list(entries) for cell, entries in self.labels.items()}
        duplicate.votes = {token: Counter(counts) for token, counts in self.votes.items()}
        duplicate.track_cells = dict(self.track_cells)
        duplicate.track_pitch = dict(self.track_pitch)
        duplicate.blocked = set(self.blocked)
        return duplicate


class LocateResult:
    def __init__(self, object_class, cells, source, tokens):
        self.object_class = object_class
        self.cells = cells
        self.source = source
        self.tokens = tokens

    @property
    def cell(self):
        return self.cells[0]

    def __repr__(self):
        return 'LocateResult({0}, {1}, source={2})'.format(self.object_class, self.cells, self.source)


def update_maps(maps, obs, pose=None):
    """
    Fuse one observation into the maps in place and return them.

    Every visible cell is rewritten in the instantaneous map. Each detection
    adds one vote for its class to its track.
    """
    by_cell = {}
    for detection in obs.detections:
        if not (0 <= detection.cell[0] < maps.shape[0] and 0 <= detection.cell[1] < maps.shape[1]):
            raise ValueError('Detection at {0} lies outside the map'.format(detection.cell))
        by_cell.setdefault(detection.cell, []).append((detection.object_class, detection.instance_id))
        maps.votes.setdefault(detection.instance_id, Counter())[detection.object_class] += 1
        maps.track_cells[detection.instance_id] = detection.cell
        maps.track_pitch[detection.instance_id] = obs.pitch
    for cell in obs.visible_cells:
        entries = by_cell.get(cell, [])
        if entries:
            maps.labels[cell] = entries
        else:
            maps.labels.pop(cell, None)
        maps.explored[cell] = True
        blocked = any(is_obstacle_class(object_class) for object_class, _ in entries)
        maps.occupancy[cell] = OBSTACLE if blocked else FREE
    if pose is not None:
        maps.explored[tuple(pose[0])] = True
    return maps


def mark_obstacle(maps, cell):
    maps.blocked.add(tuple(cell))
    maps.occupancy[tuple(cell)] = OBSTACLE
    return maps


def locate(maps, object_class, use_supplementary=True):
    """
    Cascaded lookup of object_class.

    Returns a LocateResult with every candidate cell (row-major) and the
    tokens seen there, or None. The instantaneous map is consulted only when
    the vote view has no cell of the class.
    """
    views = []
    if use_supplementary:
        views.append((SUPPLEMENTARY, maps.supplementary_view()))
    views.append((INSTANTANEOUS, maps.instantaneous_view()))
    for source, view in views:
        tokens = {cell: labels[object_class] for cell, labels in view.items() if object_class in labels}
        if tokens:
            return LocateResult(object_class, sorted(tokens), source, tokens)
    return None


def traversability_grid(maps, optimistic=True, use_supplementary=True):
    supplementary = maps.supplementary_view() if use_supplementary else None
    traversable = np.full(maps.shape, bool(optimistic))
    for row, column in zip(*np.nonzero(maps.explored)):
        cell = (int(row), int(column))
        labels = maps.effective_labels(cell, use_supplementary, supplementary)
        traversable[cell] = not any(is_obstacle_class(label) for label in labels)
    for cell in maps.blocked:
        traversable[cell] = False
    return traversable


def _abbreviations(classes):
    codes = {world.WALL_CLASS: '#'}
    used = {'#', '.', '?'}
    for object_class in sorted(classes):
        if object_class in codes:
            continue
        for candidate in object_class + object_class.lower() + 'abcdefghijklmnopqrstuvwxyz0123456789':
            if candidate not in used:
                codes[object_class] = candidate
                used.add(candidate)
                break
    return codes


def dump_maps(maps, use_supplementary=True):
    """Text rendering of the instantaneous map, the vote view and the vote counts"""
    instantaneous = maps.instantaneous_view()
    supplementary = maps.supplementary_view()
    classes = {label for view in (instantaneous, supplementary) for labels in view.values() for label in labels}
    codes = _abbreviations(classes)

    def render(view):
        lines = []
        for row in range(maps.shape[0]):
            line = ''
            for column in range(maps.shape[1]):
                cell = (row, column)
                if cell in view:
                    labels = sorted(view[cell], key=lambda label: (label != world.WALL_CLASS, label))
                    line += codes[labels[-1]]
                elif (row, column) in maps.blocked:
                    line += 'x'
                elif maps.explored[cell]:
                    line += '.'
                else:
                    line += '?'
            lines.append(line)
        return lines

    counts = []
    for row in range(maps.shape[0]):
        line = ''
        for column in range(maps.shape[1]):
            total = max(maps.cell_votes((row, column)).values(), default=0)
            line += str(total) if total < 10 else '+'
        counts.append(line)

    sections = ['M (instantaneous):'] + render(instantaneous)
    if use_supplementary:
        sections += ["M' (majority vote):"] + render(supplementary)
    sections += ['votes (max per cell):'] + counts
    sections += ['legend: ? unknown, . free, x collision'] + \
                ['  {0} {1}'.format(code, label) for label, code in sorted(codes.items(), key=lambda item: item[1])]
    return '\n'.join(sections)
