"""Inpainting and enhancement of grayscale images by diffusion on orientation stacks.

An image is lifted to a function of position and orientation, diffused
along (or across) its lifted level lines, and projected back.
"""

__version__ = "0.1.0"

from .ahe import AheParams, advanced_average, ahe, erode_mask_4conn, fill_mask, modified_ahe
from .diffusion import (
    DiffusionParams,
    apply_operator,
    assemble_dense_operator,
    auto_dt,
    run_forward,
    run_reverse,
    stability_bound,
    step_forward,
    step_reverse,
)
from .errors import BlowupError, ConfigurationError, DomainError, ImageIOError, Se2Error
from .filters import UnsharpParams, WaxParams, unsharp_r2, unsharp_se2, wax_on_wax_off
from .fixtures import make_fixture
from .grid import (
    GridSpec,
    apply_X1,
    apply_X1_squared,
    apply_X2,
    apply_X2_squared,
    apply_X3,
    apply_X3_squared,
    commutator_check,
)
from .inpaint import InpaintParams, classic_inpaint
from .io import read_image, write_image, write_stack_slices
from .lift import (
    LiftParams,
    lift_dirac,
    lift_gaussian,
    preprocess_gaussian,
    project_integral,
    project_log_mean,
    project_max,
)
from .metrics import Metrics, compute_metrics

__all__ = [name for name in dir() if not name.startswith("_")]
