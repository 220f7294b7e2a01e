"""Built-in families, all on the closed unit ball centered at the origin."""
from dataclasses import dataclass

from .holofun import make_family


@dataclass(frozen=True)
class CatalogueEntry:
    name: str
    template: str
    dimension: int = 1
    zero_free: bool = False
    note: str = ""

    def family(self):
        return make_family(self.template, self.dimension, self.zero_free, name=self.name)


CATALOGUE = {
    e.name: e
    for e in [
        CatalogueEntry("linear", "j*z1", note="sup f# = j at the origin; not normal at 0"),
        CatalogueEntry("power", "z1^j", note="f# vanishes at 0 for j >= 2"),
        CatalogueEntry("exp", "exp(j*z1)", zero_free=True, note="not normal on the imaginary axis"),
        CatalogueEntry("affine_normal", "z1 + 1/j", note="normal: f# <= 1"),
        CatalogueEntry("planar", "j*z1 + z2^2", dimension=2, note="two variables"),
        CatalogueEntry("exp_neg_alpha", "exp(j*z1)", zero_free=True,
                       note="zero-free, admits alpha <= -1"),
    ]
}


def get_family(name):
    try:
        return CATALOGUE[name].family()
    except KeyError:
        raise KeyError(f"unknown catalogue family {name!r}; known: {sorted(CATALOGUE)}") from None


def list_catalogue():
    return list(CATALOGUE.values())
