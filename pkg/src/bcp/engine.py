"""Indexed protocol representation backed by an exploration kernel.

The compiled kernel (``bcp._kernels``) is used when it imports; otherwise,
or when the environment variable ``BCP_PURE=1`` is set, the pure-Python
kernel is used.  Both produce identical graphs.
"""

from __future__ import annotations

import os
from collections import Counter

from . import _pykernels
from .core import BroadcastProtocol, Configuration

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` ('compiled', 'python' or None
    for the default choice)."""
    if name is None:
        name = "python" if os.environ.get("BCP_PURE") == "1" or _compiled is None else "compiled"
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available; build the extension first")
        return _compiled
    if name == "python":
        return _pykernels
    raise ValueError(f"unknown backend {name!r}")


def backend_name(module=None) -> str:
    module = module or get_backend()
    return "compiled" if module is _compiled and module is not None else "python"


class Engine:
    """A protocol compiled to dense integer arrays."""

    def __init__(self, protocol: BroadcastProtocol, backend: str | None = None):
        self.protocol = protocol
        self.backend = get_backend(backend)
        self.names = protocol.states
        self.index = {s: i for i, s in enumerate(self.names)}
        self.tids = protocol.transition_ids
        ix = self.index
        rv = [(ix[t.pre[0]], ix[t.pre[1]], ix[t.post[0]], ix[t.post[1]]) for t in protocol.rendezvous]
        cache = {}
        transfers = []
        for t in protocol.broadcasts:
            f = cache.get(id(t.transfer))
            if f is None:
                f = tuple(ix[t.transfer[s]] for s in self.names)
                cache[id(t.transfer)] = f
            transfers.append(f)
        self.kernel = self.backend.Kernel(
            len(self.names),
            rv,
            [ix[t.sender_pre] for t in protocol.broadcasts],
            [ix[t.sender_post] for t in protocol.broadcasts],
            transfers,
        )
        self.outputs = [protocol.output_map[s] for s in self.names]

    def key(self, C: Configuration):
        return self.kernel.pack([self.index[s] for s in C.agents()])

    def agents(self, key) -> tuple:
        return self.kernel.unpack(key)

    def config(self, key) -> Configuration:
        return Configuration(Counter(self.names[i] for i in self.kernel.unpack(key)))

    def successors(self, key) -> list:
        return self.kernel.successors(key)

    def consensus(self, key):
        outs = {self.outputs[i] for i in self.kernel.unpack(key)}
        return outs.pop() if len(outs) == 1 else None

    def is_terminal(self, key) -> bool:
        return all(succ == key for _, succ in self.kernel.successors(key))
