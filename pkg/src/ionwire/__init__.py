"""Design budgets and dynamics for trapped ions coupled through a floating wire."""
from .circuit import (CircuitEquivalent, CircuitState, circuit_equivalent, exchange_rate_circuit,
                      ion_equivalent_LC, leakage_decay_constant, quality_factor, simulate_circuit,
                      wire_capacitance)
from .configfile import dump_config, load_config, parse_config
from .decoherence import (NoiseBudget, cryo_heating_time, dissipation_time, induced_current_amplitude,
                          johnson_heating_time, noise_budget)
from .dynamics import (ClassicalState, CoupledOscillators, QuantumState, build_n_ion_coupling,
                       coherent_exchange, desk_scaled, evolve_classical, evolve_quantum, evolve_rwa,
                       exchange_time, rwa_error_metric)
from .electrostatics import (coupling_constant, coupling_constant_oracle, field_at_ion, geometry_alpha,
                             geometry_beta, induced_charge, induced_wire_potential, interaction_energy,
                             wire_and_site_potentials)
from .physmodel import (CONSTANTS, Environment, IonSpecies, ModeSpec, SystemConfig, TrapGeometry,
                        typical_config, species_constants, validate_config)

__version__ = "0.1.0"
