"""Expected face numbers of Donoho-Tanner and Cover-Efron random cones."""

__version__ = "0.1.0"
