"""Small hand-built markets shipped with the package.

``b1`` .. ``b6`` are worked examples for the exact method, ``prop1_sub`` and
``prop1_sup`` show that f is neither submodular nor supermodular,
``prop2_*`` is a profitable misreport and ``a43_*`` is a priority change that
hurts the student it favours.
"""
from __future__ import annotations

import json
from importlib import resources

from ..instance import Instance, instance_from_dict


def names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".json"))


def load_fixture(name: str) -> Instance:
    path = resources.files(__name__).joinpath(f"{name}.json")
    if not path.is_file():
        raise KeyError(f"no fixture named {name!r}; have {', '.join(names())}")
    return instance_from_dict(json.loads(path.read_text()))
