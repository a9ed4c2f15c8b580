"""Built-in fixture graphs with recommended walk and analysis settings.

The catalog is deliberately small and stable: every entry builds the same
graph on every call, passes region validation, and carries the laziness
and analysis parameters its checks were tuned with.  Entries without
region tags are plain graphs used for exact-engine oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import graphs
from .errors import ConfigError
from .graphs import ParadigmParams, RegionTaggedGraph
from .harness import AnalysisParams


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    laziness: float
    build: Callable[[], RegionTaggedGraph]
    params: ParadigmParams | None = None

    @property
    def analysis(self) -> AnalysisParams | None:
        """Regime-check defaults derived from the build parameters."""
        if self.params is None:
            return None
        return AnalysisParams(gamma=self.params.gamma(), delta=self.params.delta())


def _p1_scaled() -> ParadigmParams:
    # mass 63 keeps the core a complete tree, so the deep level is a
    # genuine two-vertex target rather than a ragged last row
    return ParadigmParams(k=3, growth="scaled", tree_mass=63)


def _p2_scaled() -> ParadigmParams:
    return ParadigmParams(k=2, growth="scaled", copies=1)


def _p3_scaled() -> ParadigmParams:
    return ParadigmParams(k=2, growth="scaled", copies=1, core_size=63)


def _p2_shallow() -> ParadigmParams:
    # depth left to the default rule: m = sqrt(6 N k) = 6 exactly here
    return ParadigmParams(
        k=3, growth=(2, 3, 6), tree_mass=2, core_lines=8, copies=24, p_exp=0.135
    )


def _p2_deep() -> ParadigmParams:
    return ParadigmParams(
        k=3, growth=(2, 3, 6), tree_mass=2, core_lines=8, copies=24,
        core_depth=8, p_exp=0.135,
    )


_CATALOG: tuple[Fixture, ...] = (
    Fixture(
        name="K2",
        description="single edge; smallest reversible chain, periodic unless lazy",
        laziness=0.5,
        build=lambda: graphs.complete_graph(2),
    ),
    Fixture(
        name="triangle",
        description="complete graph on 3 vertices; mixing profile known in closed form",
        laziness=0.0,
        build=lambda: graphs.complete_graph(3),
    ),
    Fixture(
        name="dumbbell",
        description="two triangles joined by one edge, fully region-tagged",
        laziness=0.5,
        build=graphs.dumbbell_graph,
    ),
    Fixture(
        name="path-10",
        description="path of length 10; hitting moments known in closed form",
        laziness=0.5,
        build=lambda: graphs.path_graph(10),
    ),
    Fixture(
        name="paradigm1-scaled",
        description="tree core with line and hanging trees (k=3, scaled growth); "
        "satisfies the direct-regime gap condition",
        laziness=0.5,
        build=lambda: graphs.build_paradigm1(_p1_scaled()),
        params=_p1_scaled(),
    ),
    Fixture(
        name="paradigm2-scaled",
        description="glued-lines core with one far gadget (k=2, scaled growth); "
        "gateway at distance 2, core re-entry count exactly geometric",
        laziness=0.5,
        build=lambda: graphs.build_paradigm2(_p2_scaled()),
        params=_p2_scaled(),
    ),
    Fixture(
        name="paradigm3-scaled",
        description="binary-tree core with one far gadget (k=2, scaled growth)",
        laziness=0.5,
        build=lambda: graphs.build_paradigm3(_p3_scaled()),
        params=_p3_scaled(),
    ),
    Fixture(
        name="p2-rule-depth",
        description="paradigm-2 with the default depth rule m^2 = 6Nk; the gap "
        "condition fails and the contracted route takes over",
        laziness=0.5,
        build=lambda: graphs.build_paradigm2(_p2_shallow()),
        params=_p2_shallow(),
    ),
    Fixture(
        name="p2-deep-core",
        description="paradigm-2 with a deepened core (m=8); travel time stays "
        "positive so tail and chain checks have room",
        laziness=0.5,
        build=lambda: graphs.build_paradigm2(_p2_deep()),
        params=_p2_deep(),
    ),
)

_BY_NAME = {f.name: f for f in _CATALOG}


def list_fixtures() -> list[tuple[str, str]]:
    """Stable (name, description) pairs for every built-in fixture."""
    return [(f.name, f.description) for f in _CATALOG]


def fixture_names() -> list[str]:
    return [f.name for f in _CATALOG]


def get_fixture(name: str) -> Fixture:
    try:
        return _BY_NAME[name]
    except KeyError:
        known = ", ".join(fixture_names())
        raise ConfigError(f"unknown fixture {name!r} (known: {known})") from None


def build_fixture(name: str) -> RegionTaggedGraph:
    return get_fixture(name).build()


# Family used for the cutoff trend: one far gadget per member keeps the
# leakage scale tied to the gadget alone, and depth 5 * 2^k keeps the
# admissible epsilon window open at every k.
def family_params(k: int) -> ParadigmParams:
    return ParadigmParams(
        k=k, growth="scaled", tree_mass=2**k, core_lines=1, copies=1,
        core_depth=5 * 2**k,
    )


def cutoff_family(ks=(2, 3, 4)) -> tuple[list[RegionTaggedGraph], list[int]]:
    """Graphs of the scaled family for the given k values, smallest first."""
    ks = sorted(int(k) for k in ks)
    if any(k < 1 for k in ks):
        raise ConfigError("family k values must be >= 1")
    return [graphs.build_paradigm2(family_params(k)) for k in ks], ks
