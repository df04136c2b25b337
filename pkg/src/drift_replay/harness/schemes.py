"""Snapshot schemes choosing (scoring params, reference params, reference vector)."""

from dataclasses import dataclass

from ..errors import SchemeUnavailable
from ..influence.scores import reference_vector
from ..nn.core import ParamSelection
from ..nn.params import ParamSet, SparseGrad
from ..records import RecordArrays, as_arrays

# (offset of theta_prime, offset of theta_hat) from the last snapshot
_OFFSETS = {"A": (1, 0), "B": (2, 1), "C": (2, 0), "D": (1, 0)}


@dataclass
class ResolvedScheme:
    theta_prime: ParamSet
    theta_hat: ParamSet
    V: SparseGrad


def scheme_resolve(scheme: str, snapshots, model, D, increment=None, kind=None,
                   selection=ParamSelection.SELECTED) -> ResolvedScheme:
    """With E = 5 snapshots: A = (4, 5, D), B = (3, 4, D), C = (3, 5, D), D = (4, 5, D u D')."""
    scheme = str(scheme).upper()
    if scheme not in _OFFSETS:
        raise SchemeUnavailable(f"unknown scheme {scheme!r}")
    back_prime, back_hat = _OFFSETS[scheme]
    if len(snapshots) < back_prime + 1:
        raise SchemeUnavailable(f"scheme {scheme} needs {back_prime + 1} epoch snapshots, have {len(snapshots)}")
    theta_prime = snapshots[-1 - back_prime]
    theta_hat = snapshots[-1 - back_hat]
    ref = as_arrays(D)
    if scheme == "D":
        if increment is None or len(increment) == 0:
            raise SchemeUnavailable("scheme D needs the incoming block")
        ref = RecordArrays.concat([ref, as_arrays(increment)])
    return ResolvedScheme(theta_prime, theta_hat, reference_vector(model, ref, theta_hat, kind, selection))
