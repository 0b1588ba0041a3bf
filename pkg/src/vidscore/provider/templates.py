"""Versioned prompt templates with named slots.

Each template is a text file whose first line declares the slot names that
consume the context's text blocks, in order::

    #slots: summary, question, options
    <body using {frames}, {summary}, {question}, {options}>

The ``frames`` slot is always available and renders the context's frame
references (or a no-frames marker).  Templates live in the package data
directory; a custom directory can shadow them.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from vidscore.provider.base import ScoringContext

_SLOT_HEADER = "#slots:"


@dataclass(frozen=True)
class Template:
    template_id: str
    slots: tuple[str, ...]
    body: str


@dataclass(frozen=True)
class TemplateSet:
    """The template ids used for the four scoring calls plus generation."""

    grounding_with_video: str = "grounding_with_video.v1"
    grounding_text_only: str = "grounding_text_only.v1"
    utility_with_summary: str = "utility_with_summary.v1"
    utility_no_summary: str = "utility_no_summary.v1"
    generation: str = "generation.v1"

    def scoring_ids(self) -> tuple[str, str, str, str]:
        return (
            self.grounding_with_video,
            self.grounding_text_only,
            self.utility_with_summary,
            self.utility_no_summary,
        )


DEFAULT_TEMPLATES = TemplateSet()


def _parse(template_id: str, raw: str) -> Template:
    lines = raw.split("\n")
    if not lines or not lines[0].startswith(_SLOT_HEADER):
        raise ValueError(f"template {template_id!r} missing slot header line")
    decl = lines[0][len(_SLOT_HEADER) :].strip()
    slots = tuple(s.strip() for s in decl.split(",") if s.strip()) if decl else ()
    return Template(template_id=template_id, slots=slots, body="\n".join(lines[1:]))


def get_template(template_id: str, search_dir: str | Path | None = None) -> Template:
    filename = f"{template_id}.txt"
    if search_dir is not None:
        candidate = Path(search_dir) / filename
        if candidate.is_file():
            return _parse(template_id, candidate.read_text(encoding="utf-8"))
    ref = resources.files("vidscore").joinpath("data", "templates", filename)
    if not ref.is_file():
        raise KeyError(f"unknown template id {template_id!r}")
    return _parse(template_id, ref.read_text(encoding="utf-8"))


def render_frames(ctx: ScoringContext) -> str:
    if ctx.frames is None:
        return "(no frames provided)"
    return "\n".join(f"[frame {i}] {ref}" for i, ref in enumerate(ctx.frames))


def render(template: Template, ctx: ScoringContext) -> str:
    """Fill the template's named slots from the context, in declared order."""

    if len(ctx.text_blocks) != len(template.slots):
        raise ValueError(
            f"template {template.template_id!r} expects {len(template.slots)} "
            f"text blocks ({', '.join(template.slots) or 'none'}), "
            f"got {len(ctx.text_blocks)}"
        )
    values = dict(zip(template.slots, ctx.text_blocks))
    values["frames"] = render_frames(ctx)
    return template.body.format(**values)
