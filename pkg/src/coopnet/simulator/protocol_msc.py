"""
Multi-Stream Cooperation Protocol

After the listening phase the destination picks which of the candidate nodes
(the source plus every decoding relay) transmit the Nr codeword rows, and
broadcasts that choice as an (M+1)-bit feedback pattern.

Candidate positions: 0 is the source, position j >= 1 is the j-th decoding
relay in ascending relay index. Node ids in a feedback pattern are network
ids instead: 0 is the source, m is relay m.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import ChannelRealization, ListeningOutcome, SystemParams
from .config import ENUMERATION_CAP
from .errors import DomainError, EnumerationCapError, FeedbackPatternError
from .numerics import SeedStream, capacity_logdet

SELECTION_LANE = 1


@dataclass(frozen=True)
class NodeSelection:
    """Candidate positions chosen to transmit in the cooperative phase."""

    nodes: Tuple[int, ...]

    def __post_init__(self):
        nodes = tuple(int(n) for n in self.nodes)
        if not nodes:
            raise DomainError("a node selection needs at least one node")
        if any(n < 0 for n in nodes) or any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise DomainError(f"selection positions must be nonnegative and strictly increasing, got {nodes}")
        object.__setattr__(self, "nodes", nodes)

    @property
    def includes_source(self) -> bool:
        return self.nodes[0] == 0

    def __len__(self) -> int:
        return len(self.nodes)

    def node_ids(self, decoding_set: Sequence[int]) -> Tuple[int, ...]:
        """Translate candidate positions to network node ids."""
        if self.nodes[-1] > len(decoding_set):
            raise FeedbackPatternError(
                f"selection {self.nodes} refers to a relay outside the decoding set {tuple(decoding_set)}"
            )
        return tuple(0 if p == 0 else int(decoding_set[p - 1]) for p in self.nodes)


@dataclass(frozen=True)
class FeedbackPattern:
    """(M+1)-bit broadcast; bit 0 is the source, bit m is relay m."""

    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) < 2 or any(b not in (0, 1) for b in bits):
            raise FeedbackPatternError(f"feedback pattern needs M+1 >= 2 binary flags, got {self.bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str) -> "FeedbackPattern":
        if not text or any(c not in "01" for c in text):
            raise FeedbackPatternError(f"feedback pattern must be a '0'/'1' string, got {text!r}")
        return cls(tuple(int(c) for c in text))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    @property
    def relay_count(self) -> int:
        return len(self.bits) - 1

    def selected_nodes(self) -> Tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def row_assignment(self) -> Dict[int, int]:
        """Node id -> codeword row (1-based); the k-th set bit carries row k."""
        return {node: row for row, node in enumerate(self.selected_nodes(), start=1)}


# ============================================================================
# Selection space
# ============================================================================

def _check_selection_space(candidate_count: int, Nr: int) -> None:
    if candidate_count < 1:
        raise DomainError(f"candidate_count must be at least 1, got {candidate_count}")
    if Nr < 1:
        raise DomainError(f"Nr must be at least 1, got {Nr}")
    if candidate_count > Nr:
        size = math.comb(candidate_count, Nr)
        if size > ENUMERATION_CAP:
            raise EnumerationCapError(
                f"C({candidate_count}, {Nr}) = {size} selections exceeds the enumeration cap {ENUMERATION_CAP}"
            )


@lru_cache(maxsize=256)
def selection_index_array(candidate_count: int, Nr: int) -> np.ndarray:
    """All selections as an (S, L) int array, rows in lexicographic order."""
    _check_selection_space(candidate_count, Nr)
    if candidate_count <= Nr:
        index = np.arange(candidate_count, dtype=np.int64)[np.newaxis, :]
    else:
        index = np.array(list(itertools.combinations(range(candidate_count), Nr)), dtype=np.int64)
    index.setflags(write=False)
    return index


def enumerate_selections(candidate_count: int, Nr: int) -> List[NodeSelection]:
    """
    Every feasible selection in lexicographic order.

    When candidate_count <= Nr the only selection is every candidate.

    Raises:
        EnumerationCapError: If C(candidate_count, Nr) exceeds ENUMERATION_CAP
    """
    return [NodeSelection(tuple(row)) for row in selection_index_array(candidate_count, Nr)]


def aggregate_matrix(realization: ChannelRealization, decoding_set: Sequence[int]) -> np.ndarray:
    """Nr x (|D|+1) matrix [h_sd | h_rd columns of the decoding relays]."""
    columns = np.asarray(decoding_set, dtype=np.int64) - 1
    return np.column_stack((realization.h_sd, realization.h_rd[:, columns]))


def _selection_powers(params: SystemParams, decoding_set: Sequence[int]):
    if params.homogeneous:
        return params.rho_s
    return params.node_powers(decoding_set)


def optimal_selection(
    realization: ChannelRealization, decoding_set: Sequence[int], params: SystemParams
) -> Tuple[NodeSelection, float]:
    """
    Exhaustive argmax of log2 det over the selection space.

    Ties go to the lexicographically smallest index set (first maximum in
    enumeration order).

    Returns:
        (selection, g) with g the cooperative-phase capacity of the selection
    """
    matrix = aggregate_matrix(realization, decoding_set)
    index = selection_index_array(matrix.shape[1], params.Nr)
    stack = np.moveaxis(matrix[:, index], 0, 1)  # (S, Nr, L)

    powers = _selection_powers(params, decoding_set)
    if np.ndim(powers):
        powers = powers[index][:, np.newaxis, :]
    values = capacity_logdet(stack, powers)
    best = int(np.argmax(values))
    return NodeSelection(tuple(index[best])), float(values[best])


def random_selection(stream: SeedStream, candidate_count: int, Nr: int) -> NodeSelection:
    """Uniform draw over the selection space, deterministic given the stream."""
    if candidate_count < 1:
        raise DomainError(f"candidate_count must be at least 1, got {candidate_count}")
    if candidate_count <= Nr:
        return NodeSelection(tuple(range(candidate_count)))
    rng = stream.generator()
    chosen = rng.choice(candidate_count, size=Nr, replace=False)
    return NodeSelection(tuple(sorted(int(c) for c in chosen)))


# ============================================================================
# Mutual information and outage
# ============================================================================

def direct_link_information(realization: ChannelRealization, params: SystemParams) -> float:
    """log2(1 + rho_s ||h_sd||^2), the MRC direct-link rate."""
    return math.log2(1.0 + params.rho_s * realization.direct_gain)


def selection_capacity(
    realization: ChannelRealization,
    decoding_set: Sequence[int],
    selection: NodeSelection,
    params: SystemParams,
) -> float:
    """Cooperative-phase log2 det of one selection."""
    matrix = aggregate_matrix(realization, decoding_set)
    if selection.nodes[-1] >= matrix.shape[1]:
        raise DomainError(f"selection {selection.nodes} exceeds {matrix.shape[1]} candidates")
    positions = list(selection.nodes)
    powers = _selection_powers(params, decoding_set)
    if np.ndim(powers):
        powers = powers[positions]
    return float(capacity_logdet(matrix[:, positions], powers))


def mutual_information_msc(
    realization: ChannelRealization,
    outcome: ListeningOutcome,
    selection: NodeSelection,
    params: SystemParams,
) -> float:
    """
    (1/N) [n1 log2(1 + rho_s||h_sd||^2) + (N - n1) log2 det(I + rho_s H_sel H_sel^H)]

    Raises:
        DomainError: If the outcome has no listening length (direct-only case)
    """
    if outcome.direct_only:
        raise DomainError("mutual_information_msc needs n1; use direct_link_information for the direct-only case")
    n1, N = outcome.n1, params.N
    direct = direct_link_information(realization, params)
    if n1 >= N:
        return direct
    cooperative = selection_capacity(realization, outcome.decoding_set, selection, params)
    return (n1 * direct + (N - n1) * cooperative) / N


def outage_indicator(mi: float, R: float) -> bool:
    return mi < R


# ============================================================================
# Feedback codec
# ============================================================================

def encode_feedback_pattern(selection: NodeSelection, decoding_set: Sequence[int], M: int) -> FeedbackPattern:
    """
    Build the feedback broadcast for a selection.

    Raises:
        FeedbackPatternError: If a selected relay is not in the decoding set
            or lies outside 1..M
    """
    decoding_set = tuple(int(m) for m in decoding_set)
    if any(not 1 <= m <= M for m in decoding_set):
        raise FeedbackPatternError(f"decoding set {decoding_set} has relays outside 1..{M}")
    bits = [0] * (M + 1)
    for node in selection.node_ids(decoding_set):
        bits[node] = 1
    return FeedbackPattern(tuple(bits))


def decode_feedback_pattern(pattern: FeedbackPattern, decoding_set: Optional[Sequence[int]] = None) -> NodeSelection:
    """
    Recover the selection announced by a feedback pattern.

    With the decoding set this is the exact inverse of encode_feedback_pattern.
    Without it every relay counts as a candidate, so positions equal node ids.

    Raises:
        FeedbackPatternError: If no bit is set, or a set relay bit is not in the decoding set
    """
    nodes = pattern.selected_nodes()
    if not nodes:
        raise FeedbackPatternError("feedback pattern has no bit set")
    if decoding_set is None:
        return NodeSelection(nodes)

    position = {int(m): j for j, m in enumerate(sorted(int(m) for m in decoding_set), start=1)}
    positions = []
    for node in nodes:
        if node == 0:
            positions.append(0)
        elif node in position:
            positions.append(position[node])
        else:
            raise FeedbackPatternError(f"relay {node} is selected but not in the decoding set")
    return NodeSelection(tuple(positions))
