from .decoder import decode_receiver1, decode_receiver2, decode_receiver3
from .encoder import encode_chain, sc_encode_layer
from .instance import CodeInstance, create_instance
from .layout import ChainingLayout, CopyLink, RateBackoffError, build_layout, message_bit_budget

__all__ = [
    "ChainingLayout", "CodeInstance", "CopyLink", "RateBackoffError", "build_layout",
    "create_instance", "decode_receiver1", "decode_receiver2", "decode_receiver3",
    "encode_chain", "message_bit_budget", "sc_encode_layer",
]
