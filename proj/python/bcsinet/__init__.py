try:
    from ._bcsinet import (
        Network,
        binarize,
        binary_gemv,
        build_network,
        complexity_table,
        generate_samples,
        lr_at,
        memory_multiple,
        nmse,
    )
except ImportError:  # build-tree layout: extension module next to the package
    from _bcsinet import (
        Network,
        binarize,
        binary_gemv,
        build_network,
        complexity_table,
        generate_samples,
        lr_at,
        memory_multiple,
        nmse,
    )

__all__ = [
    "Network",
    "binarize",
    "binary_gemv",
    "build_network",
    "complexity_table",
    "generate_samples",
    "lr_at",
    "memory_multiple",
    "nmse",
]
