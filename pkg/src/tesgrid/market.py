"""Double-auction market, transactive HVAC controllers, and the
main/auxiliary market wiring used for bid-interception experiments.

Clearing rule: buy bids sorted descending and sell bids ascending by
price; the cleared quantity is the largest cumulative quantity at which
the buy price still meets or exceeds the sell price, and the clearing
price is the midpoint of the marginal (last accepted) buy and sell
prices.  When the curves do not cross, the prior period's price repeats
with zero quantity.

In addition to controller bids, each market receives one buy bid at the
price cap for the feeder's unresponsive load (appliances and houses that
do not bid), mirroring how retail double auctions anchor the demand
curve; without it a supply-side price manipulation could never clear.

Price statistics: a rolling 24 h window of clearing prices gives p_avg
and p_std, recomputed exactly after every clearing.  Until the window
holds two samples the statistics fall back to warm-up seeds (the
sellers' mean offer, and 10% of it).  Controllers apply a small floor to
p_std so a long run of identical prices does not make the ramp formulas
degenerate.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

from .errors import PriceCapViolation, StalePeriod
from .loads import HouseState

STATS_WINDOW_HOURS = 24.0
DEFAULT_PRICE_CAP = 0.63  # $/kWh, maximum price the market accepts
DEFAULT_SIGMA_FLOOR = 0.003  # $/kWh, keeps the setpoint ramp well-defined
UNRESPONSIVE_TRADER = "feeder_unresponsive"


@dataclass(frozen=True)
class Bid:
    trader: str
    side: str  # BUY | SELL
    price: float  # $/kWh
    quantity: float  # kW
    period: int


@dataclass(frozen=True)
class Clearing:
    price: float
    quantity: float
    marginal_buy: float | None
    marginal_sell: float | None
    period: int


def clear_book(
    buys: list[Bid], sells: list[Bid], prior_price: float, period: int
) -> Clearing:
    """Pure clearing of one order book (see module docstring for the rule)."""
    b = sorted(buys, key=lambda bid: -bid.price)  # stable: FIFO within a price
    s = sorted(sells, key=lambda bid: bid.price)
    i = j = 0
    remaining_b = b[0].quantity if b else 0.0
    remaining_s = s[0].quantity if s else 0.0
    quantity = 0.0
    marginal_buy = marginal_sell = None
    while i < len(b) and j < len(s) and b[i].price >= s[j].price:
        take = min(remaining_b, remaining_s)
        quantity += take
        marginal_buy, marginal_sell = b[i].price, s[j].price
        remaining_b -= take
        remaining_s -= take
        if remaining_b <= 0.0:
            i += 1
            remaining_b = b[i].quantity if i < len(b) else 0.0
        if remaining_s <= 0.0:
            j += 1
            remaining_s = s[j].quantity if j < len(s) else 0.0
    if quantity <= 0.0:
        return Clearing(prior_price, 0.0, None, None, period)
    return Clearing((marginal_buy + marginal_sell) / 2.0, quantity, marginal_buy, marginal_sell, period)


class Market:
    """Order book, clearing history, and rolling price statistics."""

    def __init__(
        self,
        name: str,
        period_seconds: int,
        price_cap: float = DEFAULT_PRICE_CAP,
        init_price: float = 0.10,
        role: str = "MAIN",
    ):
        self.name = name
        self.role = role
        self.period_seconds = period_seconds
        self.price_cap = price_cap
        self.current_period = 0
        window = max(2, int(STATS_WINDOW_HOURS * 3600 / period_seconds))
        self.history: deque[float] = deque(maxlen=window)
        self.last_price = init_price
        self.seed_avg = init_price
        self.seed_std = 0.1 * init_price
        self.p_avg = self.seed_avg
        self.p_std = self.seed_std
        self.buys: list[Bid] = []
        self.sells: list[Bid] = []
        self.last_clearing = Clearing(init_price, 0.0, None, None, -1)
        self.last_bid_counts = (0, 0)

    def seed_statistics(self, mean_offer: float) -> None:
        """Warm-up seeds from the attached sellers' constant offers."""
        self.seed_avg = mean_offer
        self.seed_std = 0.1 * mean_offer
        if len(self.history) < 2:
            self.p_avg = self.seed_avg
            self.p_std = self.seed_std

    def submit(self, bid: Bid) -> None:
        if bid.price > self.price_cap:
            raise PriceCapViolation(
                f"{self.name}: bid price {bid.price:g} exceeds cap {self.price_cap:g}"
            )
        if bid.period != self.current_period:
            raise StalePeriod(
                f"{self.name}: bid for period {bid.period}, current is {self.current_period}"
            )
        (self.buys if bid.side == "BUY" else self.sells).append(bid)

    def clear(self) -> Clearing:
        """Clear the current book, publish the price, roll statistics."""
        clearing = clear_book(self.buys, self.sells, self.last_price, self.current_period)
        self.last_bid_counts = (len(self.buys), len(self.sells))
        self.buys = []
        self.sells = []
        self.last_price = clearing.price
        self.last_clearing = clearing
        self.history.append(clearing.price)
        self._recompute_statistics()
        self.current_period += 1
        return clearing

    def _recompute_statistics(self) -> None:
        if len(self.history) < 2:
            self.p_avg = self.seed_avg
            self.p_std = self.seed_std
            return
        n = len(self.history)
        mean = sum(self.history) / n
        var = sum((p - mean) ** 2 for p in self.history) / n
        self.p_avg = mean
        self.p_std = math.sqrt(var)


@dataclass
class Controller:
    """Price-responsive HVAC agent: bids for its house's rated power and
    moves the cooling setpoint with the published clearing price."""

    name: str
    house: str
    market: str
    t_min: float
    t_base: float
    t_max: float
    k_ramp: float
    sigma_floor: float = DEFAULT_SIGMA_FLOOR

    def _sigma(self, market: Market) -> float:
        return max(market.p_std, self.sigma_floor)

    def make_bid(self, house: HouseState, market: Market) -> Bid | None:
        """Ramp bid around the market's mean price, or no bid when cold."""
        if house.t_in <= self.t_min:
            return None
        sigma = self._sigma(market)
        price = market.p_avg + (house.t_in - self.t_base) * self.k_ramp * sigma / (
            self.t_max - self.t_base
        )
        price = min(max(price, 0.0), market.price_cap)
        return Bid(self.name, "BUY", price, house.hvac_kw, market.current_period)

    def apply_clearing(self, house: HouseState, market: Market, clearing: Clearing) -> float:
        """Re-center the thermostat from the published price; returns T_set."""
        sigma = self._sigma(market)
        t_set = self.t_base + (clearing.price - market.p_avg) * (self.t_max - self.t_base) / (
            self.k_ramp * sigma
        )
        house.t_set = min(max(t_set, self.t_min), self.t_max)
        return house.t_set


@dataclass(frozen=True)
class SellerAgent:
    name: str
    price: float  # $/kWh, constant offer
    capacity: float  # kW


def seller_bids(sellers: list[SellerAgent], period: int) -> list[Bid]:
    """One SELL bid per generator at its constant price and capacity."""
    return [Bid(s.name, "SELL", s.price, s.capacity, period) for s in sellers]


class AuxiliaryBidder:
    """Bridges one trader between the main and auxiliary markets.

    Seller side: replicates the represented seller's constant bid into the
    auxiliary market each period (exact, since the offers are constant).
    Buyer side: forwards the represented controller's previous-period
    auxiliary-market bid to the main market; precise bids are not
    observable, so the estimate runs one period late.
    """

    def __init__(self, trader: str, direction: str):
        assert direction in ("BUYER_SIDE", "SELLER_SIDE")
        self.trader = trader
        self.direction = direction
        self.held_bid: Bid | None = None

    def observe(self, bid: Bid | None) -> None:
        self.held_bid = bid

    def forwarded(self, period: int) -> Bid | None:
        if self.held_bid is None:
            return None
        return replace(self.held_bid, period=period)
