from .radial import g_eval, G1, G2, G3, SINC, INVERSE_LIMIT
from .so3 import (
    hat,
    vee,
    so3_exp,
    so3_log,
    jr_so3,
    jr_inv_so3,
    jl_so3,
    f_maps,
    h1_so3,
    h1p_so3,
    l_maps_so3,
    SMALL_ANGLE,
)
from .se3 import (
    Pose3,
    se3_exp,
    se3_log,
    se3_adjoint,
    se3_curly,
    q_se3,
    qp_se3,
    jr_se3,
    jr_inv_se3,
    s_blocks,
    c_blocks,
    h_se3,
    hp_se3,
    l_maps_se3,
)

__all__ = [
    "g_eval",
    "G1",
    "G2",
    "G3",
    "SINC",
    "INVERSE_LIMIT",
    "hat",
    "vee",
    "so3_exp",
    "so3_log",
    "jr_so3",
    "jr_inv_so3",
    "jl_so3",
    "f_maps",
    "h1_so3",
    "h1p_so3",
    "l_maps_so3",
    "SMALL_ANGLE",
    "Pose3",
    "se3_exp",
    "se3_log",
    "se3_adjoint",
    "se3_curly",
    "q_se3",
    "qp_se3",
    "jr_se3",
    "jr_inv_se3",
    "s_blocks",
    "c_blocks",
    "h_se3",
    "hp_se3",
    "l_maps_se3",
]
