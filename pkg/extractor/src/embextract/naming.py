"""Class-name normalization and prompt templating.

Raw dataset class names are often machine-oriented ("red_fox",
"gazelleGrants", "CNV"). Text encoders do better with human-friendly
phrasing, so names pass through an alias table first (exact match, e.g.
medical abbreviations to full disease names) and otherwise have underscores
replaced with spaces and camelCase words separated.
"""

from __future__ import annotations

import re

DEFAULT_ALIASES = {
    "CNV": "Choroidal Neovascularization",
    "DME": "Diabetic Macular Edema",
}

_CAMEL_BOUNDARY = re.compile(r"([a-z0-9])([A-Z])")


def normalize_class_name(raw: str, aliases: dict | None = None) -> str:
    """Map a raw class name to its display form."""
    if not raw:
        raise ValueError("class name is empty")
    table = DEFAULT_ALIASES if aliases is None else aliases
    if raw in table:
        return table[raw]
    name = raw.replace("_", " ")
    name = _CAMEL_BOUNDARY.sub(lambda m: f"{m.group(1)} {m.group(2).lower()}", name)
    return name


def load_aliases(path) -> dict:
    """Read an alias table: one `raw=display` pair per line; # comments."""
    table = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected raw=display, got {line!r}")
            raw, display = line.split("=", 1)
            table[raw.strip()] = display.strip()
    return table


def build_prompts(names, template: str, aliases: dict | None = None) -> list:
    """Fill the template's single "{label}" slot with each normalized name."""
    if template.count("{label}") != 1:
        raise ValueError(
            f'template must contain exactly one "{{label}}" placeholder: {template!r}'
        )
    return [template.replace("{label}", normalize_class_name(n, aliases)) for n in names]
