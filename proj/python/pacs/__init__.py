"""Positive-augmented contrastive caption scoring.

Thin re-export of the compiled core. The ``pacs`` command-line tool offers
the same operations over container and manifest files.
"""

from ._core import (
    Container,
    IdfTable,
    PacsError,
    compute_idf,
    cosine,
    decode_container,
    info_nce,
    kendall_tau_b,
    kendall_tau_c,
    l2_normalize,
    load_heads,
    pac_loss,
    pac_loss_grad,
    pac_score,
    read_container,
    ref_pac_score,
    run_cli,
    save_heads,
    spearman_rho,
    tokenize,
    video_score,
    write_container,
)

__all__ = [
    "Container",
    "IdfTable",
    "PacsError",
    "compute_idf",
    "cosine",
    "decode_container",
    "info_nce",
    "kendall_tau_b",
    "kendall_tau_c",
    "l2_normalize",
    "load_heads",
    "pac_loss",
    "pac_loss_grad",
    "pac_score",
    "read_container",
    "ref_pac_score",
    "run_cli",
    "save_heads",
    "spearman_rho",
    "tokenize",
    "video_score",
    "write_container",
]
