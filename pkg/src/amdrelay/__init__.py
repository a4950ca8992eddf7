"""AMD-coded robust secret sharing over trusted-repeater relay networks."""

from .amd import AmdCodeword, AmdParams, amd_decode, amd_encode, delta_oracle
from .gf import GF, FieldElement, FieldSpec, field_from_name
from .relay import RelayNetwork, network_setup, run_protocol
from .rng import Rng
from .sss import AccessStructure, SharingScheme, ShareVector

__version__ = "0.1.0"

__all__ = [
    "AmdCodeword", "AmdParams", "amd_decode", "amd_encode", "delta_oracle",
    "GF", "FieldElement", "FieldSpec", "field_from_name",
    "RelayNetwork", "network_setup", "run_protocol",
    "Rng", "AccessStructure", "SharingScheme", "ShareVector",
]
