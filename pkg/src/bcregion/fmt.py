"""Number formatting shared by the line-record outputs."""


def fmt_sig(x: float, sig: int = 12) -> str:
    """``x`` with ``sig`` significant digits, trailing zeros kept."""
    x = float(x)
    if x == 0.0:
        return "0." + "0" * sig
    return f"{x:#.{sig}g}"


def fmt_human(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # no "-0.000000"
    return f"{x:.6f}"
