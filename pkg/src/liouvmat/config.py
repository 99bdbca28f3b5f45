from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Config:
    """Budgets and precision knobs. All limits are hard: exceeding one raises."""

    start_bits: int = 64
    bits_cap: int = 4096
    # (2*Qmax+1)**n must stay below this
    enum_budget: int = 10**8
    # largest exponent (in bits) an exact Liouville truncation may carry
    truncation_bits: int = 1 << 20
    # standard polynomial s_k is built only for k <= this
    nc_degree_cap: int = 8

    def with_(self, **kw):
        return replace(self, **kw)


DEFAULT = Config()
