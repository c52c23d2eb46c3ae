"""Long-stepsize gradient descent schedules built on the silver ratio.

The package constructs the silver, left-heavy and right-heavy stepsize
schedules, their convergence constants, the nonnegative multiplier
certificates behind their guarantees, and harnesses that check all of it
numerically.
"""

from longsteps.constants import (
    ConstantsTable,
    FLOAT,
    alpha,
    asymptotic_constant,
    beta,
    constants_table,
    mp_backend,
    r_next,
    r_value,
    rho,
)
from longsteps.report import BoundReport
from longsteps.schedules import (
    StepSchedule,
    check_r_identities,
    check_silver_identities,
    composite,
    h_left,
    h_right,
    make_schedule,
    silver,
)
from longsteps.trajectory import (
    STAR,
    FirstOrderPoint,
    Trajectory,
    free_rollout,
    gd_rollout,
    q_form,
    q_matrix,
)
from longsteps.functions import Huber, Quadratic, SmoothConvexFn, huber, quadratic
from longsteps.certificates import (
    CertMatrix,
    CertVector,
    build_A,
    build_B,
    build_c,
    build_D,
    check_pB,
    check_propA,
    check_propD,
    weighted_q_sum,
)
from longsteps.bounds import (
    bound_thm1,
    bound_thm2,
    bound_thm3,
    restart_run,
    table1,
)

__version__ = "0.1.0"
