"""Polar codes for list decoding: dynamic-programming construction,
SC/SCL/ML decoders, AWGN simulation and Reed-Muller similarity."""
from .polar import CodeSpec, encode, index_to_sign_sequence, polar_transform, rm_info_set, wt
from .channel import AwgnChannel, RngStream, llr_from_awgn, modulate_bpsk, transmit
from .decode import CrcSpec, crc_attach, crc_check, ml_decode, sc_decode, scl_decode

__all__ = [
    "AwgnChannel", "CodeSpec", "CrcSpec", "RngStream", "crc_attach", "crc_check", "encode",
    "index_to_sign_sequence", "llr_from_awgn", "ml_decode", "modulate_bpsk", "polar_transform",
    "rm_info_set", "sc_decode", "scl_decode", "transmit", "wt",
]
