"""Churn propensity and causal analysis toolkit.

Thin python surface over the native core: preprocessing (SMOTE,
standardization, RFE), the model roster, evaluation metrics, graph
identification, effect estimation with refutation, synthetic ground-truth
generators, and the six pipeline stages.
"""

try:
    from ._core import *  # noqa: F401,F403  (installed package layout)
    from . import _core as _impl
except ImportError:  # in-tree build: the extension sits next to the package dir
    from _core import *  # type: ignore # noqa: F401,F403
    import _core as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
