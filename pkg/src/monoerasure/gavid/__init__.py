"""Verifiable information dispersal built on the erasure codes."""

from .commit import (
    DIGEST_SIZE, MerkleScheme, VectorScheme, fragment_bytes, fragment_digest,
    merkle_build, merkle_verify, tree_depth,
)
from .protocol import (
    ABORT, DELIVERED, ECHO, FRAGMENT, READY, RETRIEVE, RETRIEVED, SEND, STORED,
    GavidConfig, Message, Output, Server, StoredFragment, disperse_messages,
    handle_message, make_config,
)

__all__ = [
    "ABORT", "DELIVERED", "DIGEST_SIZE", "ECHO", "FRAGMENT", "READY", "RETRIEVE",
    "RETRIEVED", "SEND", "STORED", "GavidConfig", "MerkleScheme", "Message", "Output",
    "Server", "StoredFragment", "VectorScheme", "disperse_messages", "fragment_bytes",
    "fragment_digest", "handle_message", "make_config", "merkle_build", "merkle_verify",
    "tree_depth",
]
