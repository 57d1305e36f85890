"""Lattice-based publicly verifiable secret sharing and a two-round randomness beacon."""

from .drng import (EpochRecord, ParticipantState, PublicDirectory, drng_finalize, drng_init, drng_join,
                   drng_randgen_round1, drng_randgen_round2, drng_setup, drng_ver)
from .errors import BeaconError, DecodeError
from .params import SystemParams, get_params, validate_params
from .pvss import (pvss_combine, pvss_dec, pvss_decver, pvss_keygen, pvss_keyver, pvss_setup, pvss_share,
                   pvss_sharever)
from .sim import NetworkConfig, sim_run
from .transcript import TranscriptFile

__all__ = [
    "BeaconError", "DecodeError", "EpochRecord", "NetworkConfig", "ParticipantState", "PublicDirectory",
    "SystemParams", "TranscriptFile", "drng_finalize", "drng_init", "drng_join", "drng_randgen_round1",
    "drng_randgen_round2", "drng_setup", "drng_ver", "get_params", "pvss_combine", "pvss_dec",
    "pvss_decver", "pvss_keygen", "pvss_keyver", "pvss_setup", "pvss_share", "pvss_sharever", "sim_run",
    "validate_params",
]
