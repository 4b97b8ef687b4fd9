"""Coded caching for partially cooperative device-to-device networks."""

from .combinat import binom, rank_subset, subfile_index, subfile_owner, unrank_subset
from .gf import FieldSpec
from .mds import MdsCode, build_generator, decode, encode, xor_payloads
from .scheme import (
    CacheContents,
    CodedSubfileId,
    SchemeParams,
    Transmission,
    decode_user,
    deliver,
    derive_params,
    place,
    run_round,
)
from .tradeoff import (
    TradeoffPoint,
    achievable_curve,
    feasibility_check,
    lower_bound,
    optimal_load_high_memory,
    remark1_point,
    theorem1_point,
)

__version__ = "0.1.0"
