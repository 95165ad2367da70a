from .rational_pl import RationalPL
from .map_expr import (
    MapExpr, Identity, Affine, PowerShift, LogShift, LogPowerShift, ExpGlue, Reflect,
    RationalPLRef, PeriodicLift, Extend, DiagonalConjugate, Compose, Inverse, GermDomain,
)
from .verdicts import SampleGrid
from .generator import GeneratorSpec, WordSpec

__all__ = ['RationalPL', 'MapExpr', 'Identity', 'Affine', 'PowerShift', 'LogShift',
           'LogPowerShift', 'ExpGlue', 'Reflect', 'RationalPLRef', 'PeriodicLift', 'Extend',
           'DiagonalConjugate', 'Compose', 'Inverse', 'GermDomain', 'SampleGrid',
           'GeneratorSpec', 'WordSpec']
