"""Merging pre-annotations from several annotators into one set.

Two mentions agree when they carry the same element id and their character
spans overlap; transitively overlapping mentions form a cluster. Union keeps
every cluster, intersection keeps clusters every tool contributed to, and
vote(k) keeps clusters with at least k contributing tools. A cluster is
rendered as its widest span, with all contributing tool names in ``source``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from .corpus import ClinicalNote
from .errors import MixedNotes
from .extractor import AnnotationSet, Mention
from .lexicon import Lexicon
from .standoff import entity_to_mention, parse_ann

log = logging.getLogger(__name__)

SOURCE_SEP = "+"


@dataclass(frozen=True)
class ToolOutput:
    tool_name: str
    note_id: str
    mentions: tuple[Mention, ...]


@dataclass(frozen=True)
class EnsembleConfig:
    method: str = "union"  # union | intersection | vote
    vote_k: int = 1
    negation_policy: str = "keep-flag"  # keep-flag | drop-negated

    def __post_init__(self) -> None:
        if self.method not in ("union", "intersection", "vote"):
            raise ValueError(f"unknown ensemble method {self.method!r}")
        if self.negation_policy not in ("keep-flag", "drop-negated"):
            raise ValueError(f"unknown negation policy {self.negation_policy!r}")
        if self.method == "vote" and self.vote_k < 1:
            raise ValueError("vote k must be >= 1")


def import_tool_output(
    ann_text: str,
    note: ClinicalNote,
    tool_name: str,
    lexicon: Lexicon,
) -> ToolOutput:
    """Adapt an external tool's .ann file; unknown labels are logged and skipped."""
    doc = parse_ann(ann_text)
    negated = doc.negated_tids()
    mentions = []
    for entity in doc.entities:
        if entity.label not in lexicon:
            log.warning(
                "%s/%s: skipping %s with unknown label %r",
                tool_name, note.id, entity.tid, entity.label,
            )
            continue
        mentions.append(entity_to_mention(entity, note, entity.tid in negated, tool_name))
    mentions.sort(key=Mention.sort_key)
    return ToolOutput(tool_name=tool_name, note_id=note.id, mentions=tuple(mentions))


@dataclass
class _Cluster:
    element_id: str
    members: list[tuple[str, Mention]]  # (tool_name, mention)

    def tools(self) -> set[str]:
        return {tool for tool, _ in self.members}

    def widest(self) -> Mention:
        return max(
            (m for _, m in self.members),
            key=lambda m: (m.end - m.start, -m.start),
        )

    def majority_assertion(self) -> str:
        negated = sum(1 for _, m in self.members if m.assertion == "negated")
        affirmed = len(self.members) - negated
        return "negated" if negated > affirmed else "affirmed"

    def all_negated(self) -> bool:
        return all(m.assertion == "negated" for _, m in self.members)


def _cluster(outputs: Sequence[ToolOutput]) -> list[_Cluster]:
    tagged = sorted(
        ((out.tool_name, m) for out in outputs for m in out.mentions),
        key=lambda tm: (tm[1].element_id, tm[1].start, tm[1].end, tm[0]),
    )
    clusters: list[_Cluster] = []
    current: _Cluster | None = None
    extent = -1
    for tool, m in tagged:
        if current is not None and (m.element_id != current.element_id or m.start >= extent):
            clusters.append(current)
            current = None
        if current is None:
            current = _Cluster(element_id=m.element_id, members=[])
            extent = -1
        current.members.append((tool, m))
        extent = max(extent, m.end)
    if current is not None:
        clusters.append(current)
    return clusters


def ensemble_merge(outputs: Sequence[ToolOutput], cfg: EnsembleConfig | None = None) -> AnnotationSet:
    """Merge per-note tool outputs according to the configured method."""
    cfg = cfg or EnsembleConfig()
    if not outputs:
        raise ValueError("ensemble_merge needs at least one tool output")
    note_ids = {out.note_id for out in outputs}
    if len(note_ids) != 1:
        raise MixedNotes(f"outputs refer to different notes: {sorted(note_ids)}")
    note_id = outputs[0].note_id

    tool_names = {out.tool_name for out in outputs}
    if cfg.method == "vote" and cfg.vote_k > len(tool_names):
        raise ValueError(f"vote k={cfg.vote_k} exceeds tool count {len(tool_names)}")
    needed = {
        "union": 1,
        "vote": cfg.vote_k,
        "intersection": len(tool_names),
    }[cfg.method]

    merged = []
    for cluster in _cluster(outputs):
        if len(cluster.tools()) < needed:
            continue
        if cfg.negation_policy == "drop-negated" and cluster.all_negated():
            continue
        base = cluster.widest()
        merged.append(
            Mention(
                element_id=cluster.element_id,
                start=base.start,
                end=base.end,
                surface=base.surface,
                assertion=cluster.majority_assertion(),
                source=SOURCE_SEP.join(sorted(cluster.tools())),
            )
        )
    merged.sort(key=Mention.sort_key)
    return AnnotationSet(note_id=note_id, mentions=tuple(merged))
