"""Exception hierarchy. All library errors derive from VnlabError."""


class VnlabError(Exception):
    pass


class NotNormal(VnlabError):
    """Input fails its (skew-)Hermitian symmetry requirement."""


class NoConvergence(VnlabError):
    """Iterative diagonalization did not reach tolerance within the sweep cap."""


class DomainError(VnlabError):
    """A scalar function is undefined at some eigenvalue."""


class SpectrumHit(VnlabError):
    """Resolvent requested at (numerically) an eigenvalue."""


class BadWeights(VnlabError):
    pass


class BadPermutation(VnlabError):
    pass


class NotMember(VnlabError):
    """Matrix is not a member of the algebra to tolerance."""


class NotAffiliated(VnlabError):
    pass


class BadPartition(VnlabError):
    """Cells do not define a unital subalgebra."""


class BlockDetectionError(VnlabError):
    """Generated algebra is not representable as a permuted block-diagonal form."""


class ClampExceeded(VnlabError):
    """Compressed spectrum overshoots the invertible band beyond tolerance."""


class BadControl(VnlabError):
    pass


class QuadratureDiverged(VnlabError):
    pass


class BadCutoff(VnlabError):
    pass


class BadConfig(VnlabError):
    """Experiment configuration failed validation."""
