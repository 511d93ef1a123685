"""Random valid configurations shared by the property tests."""
import numpy as np
from hypothesis import strategies as st

from ionwire import Environment, ModeSpec, SystemConfig, TrapGeometry, species_constants
from ionwire.physmodel import known_species


def make_config(H, a_frac, L_frac, h_fracs, nu, species="Ca40+", **env):
    return SystemConfig(
        species=species_constants(species),
        geometry=TrapGeometry(H, a_frac * H, L_frac * H, tuple(f * H for f in h_fracs)),
        modes=ModeSpec.from_frequencies([nu] * len(h_fracs)),
        environment=Environment(**env),
    )


def random_config(rng: np.random.Generator, n_ions: int = 2) -> SystemConfig:
    """Resonant config with every hard constraint satisfied."""
    H = 10 ** rng.uniform(-4.5, -3.0)
    return make_config(
        H,
        a_frac=rng.uniform(0.01, 0.2),
        L_frac=rng.uniform(10.0, 200.0),
        h_fracs=rng.uniform(0.05, 0.95, n_ions),
        nu=10 ** rng.uniform(5.0, 7.0),
        species=str(rng.choice(known_species())),
        temperature=rng.uniform(0.1, 400.0),
        wire_resistance=10 ** rng.uniform(-3.0, 2.0),
        leakage_resistance=10 ** rng.uniform(8.0, 15.0),
        resistivity_ratio=rng.uniform(1.0, 1000.0),
    )


@st.composite
def configs(draw, n_ions=2):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_config(np.random.default_rng(seed), n_ions)
