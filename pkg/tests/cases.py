"""Parameter sets shared by the test modules, one per density/membership case."""

from qfactor.chain import ChainParams, harmonic_params, isotropic_params, qhahn_params

Q = 0.5


def case_params(q: float = Q) -> dict[str, ChainParams]:
    return {
        "1": ChainParams(q=q, gamma=0.0, b2=1.0, a0=1.0, a1=1 / q, h=0.3),
        "1-out": ChainParams(q=q, gamma=0.0, b2=1.0, a0=1.0, a1=1 / q, h=5.0),
        "i": ChainParams(q=q, gamma=1.0, b2=0.5, b0=1.0, a0=1.0, a1=0.2, h=0.3, A0_shift=-1.0),
        "iii": ChainParams(q=q, gamma=1.0, b2=0.5, b0=1.0, a0=1.0, a1=1 / q + 0.5 / (1 - q), h=0.0,
                           A0_shift=-1.0),
        "iv": ChainParams(q=q, gamma=1.0, b2=0.3, b1=1.0, a0=1.0, a1=0.5, h=0.2, A0_shift=0.0),
        "iv-out": ChainParams(q=q, gamma=1.0, b2=0.3, b1=1.0, a0=1.0, a1=0.5, h=5.0, A0_shift=0.0),
        "vi": ChainParams(q=q, gamma=1.0, b2=0.3, b1=1.0, a0=1.0, a1=0.5, h=0.0, A0_shift=0.0),
        "vii": ChainParams(q=q, gamma=1.0, b2=1.0, a0=1.0, a1=0.5, h=0.2),
        "viii": ChainParams(q=q, gamma=1.0, b2=1.0, a0=1.0, a1=0.5),
    }


def families(q: float) -> dict[str, ChainParams]:
    """The polynomial family and the two constant-weight families."""
    return {"qhahn": qhahn_params(q), "harmonic": harmonic_params(q), "isotropic": isotropic_params(q)}
