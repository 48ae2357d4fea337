"""Non-Markovian information and energy flows of open two-level systems."""

from .analysis import (
    IntervalReport, Trajectory, detect_intervals, overlap_correlation, verify_relation,
)
from .dynamics import IntegratorConfig, TimeLocalGenerator, bloch_rhs, integrate
from .jc import (
    JcParams, g_closed_form, g_volterra, jc_energy_current, jc_qfi_flow, jc_rate, jc_rho,
    jc_trajectory,
)
from .qfi import build_c_matrix, max_qfi, optimal_directions, qfi_flow_numeric, qfi_for_direction
from .sbm import (
    SbmParams, sbm_bloch, sbm_energy_current, sbm_integrals, sbm_qfi_flow, sbm_rates,
    sbm_rates_kernel, sbm_trajectory,
)
from .spectral import (
    BathKernels, Lorentzian, OhmicFamily, bose_occupation, eval_j, kernel_d, kernel_d1,
)

__version__ = "0.1.0"
