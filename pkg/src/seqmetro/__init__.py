"""Fisher information rates for sequentially measured open quantum systems.

A probe evolves under a Lindblad generator between repeated measurements;
the outcome string is a Markov chain whose Fisher information grows as
``F_1 + (N - 1) F_{2|1}``. The package builds the chain from the dynamics,
computes these rates, scans waiting times and checks estimators against the
Cramer-Rao bound.
"""
from .chain import (DegenerateChainError, StationaryDistribution, Trajectory, TransitionMatrix,
                    sample, sample_many, sequence_probability, stationary, transition_matrix)
from .channels import POVM, MeasureEvolveStep, ProjectiveBasis, collision_povm, outcome_probabilities
from .estimate import McReport, count_transitions, mle, monte_carlo, subsample
from .fisher import (FisherReport, ParamSpec, chain_fisher, enumerate_fi, f_conditional,
                     f_sequential, fi_of_distribution)
from .models import (RabiModel, ThermometryModel, rabi_criticality, rabi_fisher, rabi_transition,
                     thermal_distribution, thermal_fi, thermo_fisher, thermo_transition_analytic)
from .qcore import DensityMatrix, HamiltonianSpec, Superoperator, liouvillian, propagate, spectrum
from .scan import ScanGrid, maximize_1d, maximize_2d, scan, thermo_f_sharp, thermo_f_star

__version__ = "0.1.0"
