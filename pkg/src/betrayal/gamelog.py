"""Game-log corpus: JSONL parsing, validation, message filtering, statistics.

One game per line::

    {"game_id": "g1", "variant": "standard",
     "powers": ["AUSTRIA", "ENGLAND", ...],
     "seasons": [{"year": 1901, "phase": "spring",
                  "occupancy": {"VIE": "AUSTRIA"}, "centers": {"VIE": "AUSTRIA"},
                  "orders": [{"power": "AUSTRIA", "unit": "army", "location": "VIE",
                              "action": {"move": "TYR"}}],
                  "messages": [{"from": "AUSTRIA", "to": "GERMANY",
                                "text": "...", "admin": false}]}]}

Season indices are game-time ordinals: ``2 * (year - 1901)`` plus one for fall,
so a log that starts in 1901 spring numbers its seasons 0, 1, 2, ...
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Union

from .errors import ConsistencyError, EmptyCorpus, RecordSyntaxError, SchemaError

STANDARD_POWERS = ("AUSTRIA", "ENGLAND", "FRANCE", "GERMANY", "ITALY", "RUSSIA", "TURKEY")
BROADCAST = "ALL"
PHASES = ("spring", "fall")
FIRST_YEAR = 1901

# Standard-map provinces (coasts folded into their province).
LAND_TERRITORIES = frozenset(
    "BOH BUD BUR GAL MOS MUN PAR RUH SER SIL TYR UKR VIE WAR".split()
)
COASTAL_TERRITORIES = frozenset(
    """ALB ANK APU ARM BEL BER BRE BUL CLY CON DEN EDI FIN GAS GRE HOL KIE LON
    LVN LVP MAR NAF NAP NWY PIC PIE POR PRU ROM RUM SEV SMY SPA STP SWE SYR TRI
    TUN TUS VEN WAL YOR""".split()
)
SEA_TERRITORIES = frozenset(
    "ADR AEG BAL BAR BLA BOT EAS ENG HEL ION IRI LYO MAO NAO NTH NWG SKA TYS WES".split()
)
STANDARD_TERRITORIES = LAND_TERRITORIES | COASTAL_TERRITORIES | SEA_TERRITORIES
SUPPLY_CENTERS = frozenset(
    """ANK BEL BER BRE BUD BUL CON DEN EDI GRE HOL KIE LON LVP MAR MOS MUN NAP
    NWY PAR POR ROM RUM SER SEV SMY SPA STP SWE TRI TUN VEN VIE WAR""".split()
)

_TERRITORY_RE = re.compile(r"^[A-Z]{3}$")


# --------------------------------------------------------------------------
# Orders
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Hold:
    pass


@dataclass(frozen=True)
class Move:
    dest: str


@dataclass(frozen=True)
class SupportHold:
    target_power: str
    target_loc: str


@dataclass(frozen=True)
class SupportMove:
    target_power: str
    origin: str
    dest: str


@dataclass(frozen=True)
class Convoy:
    target_power: str
    origin: str
    dest: str


Action = Union[Hold, Move, SupportHold, SupportMove, Convoy]


@dataclass(frozen=True)
class Order:
    power: str
    unit: str  # "army" | "fleet"
    location: str
    action: Action

    def territories(self) -> tuple[str, ...]:
        a = self.action
        if isinstance(a, Move):
            return (self.location, a.dest)
        if isinstance(a, SupportHold):
            return (self.location, a.target_loc)
        if isinstance(a, (SupportMove, Convoy)):
            return (self.location, a.origin, a.dest)
        return (self.location,)


@dataclass(frozen=True)
class Message:
    sender: str
    recipient: str  # a power or BROADCAST
    season_index: int
    text: str
    admin: bool = False

    @property
    def is_broadcast(self) -> bool:
        return self.recipient == BROADCAST


@dataclass(frozen=True)
class SeasonRecord:
    index: int
    year: int
    phase: str
    orders: tuple[Order, ...] = ()
    messages: tuple[Message, ...] = ()
    occupancy: dict[str, str] = field(default_factory=dict)
    centers: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class GameLog:
    game_id: str
    variant: str
    powers: tuple[str, ...]
    seasons: tuple[SeasonRecord, ...]

    def season(self, index: int) -> SeasonRecord | None:
        for s in self.seasons:
            if s.index == index:
                return s
        return None

    @property
    def n_messages(self) -> int:
        return sum(len(s.messages) for s in self.seasons)

    @property
    def last_season_index(self) -> int:
        return self.seasons[-1].index if self.seasons else -1


def season_ordinal(year: int, phase: str) -> int:
    return 2 * (year - FIRST_YEAR) + PHASES.index(phase)


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def _require(obj: dict, key: str, typ, line: int | None, path: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{path}{key}", "missing", line)
    value = obj[key]
    # bool is an int subclass; keep them apart
    if typ is int and isinstance(value, bool):
        raise SchemaError(f"{path}{key}", f"expected {typ.__name__}", line)
    if not isinstance(value, typ):
        name = typ.__name__ if isinstance(typ, type) else "/".join(t.__name__ for t in typ)
        raise SchemaError(f"{path}{key}", f"expected {name}", line)
    return value


def _territory(value: Any, path: str, line: int | None) -> str:
    if not isinstance(value, str) or not _TERRITORY_RE.match(value):
        raise SchemaError(path, "expected an uppercase 3-letter territory id", line)
    return value


def _power(value: Any, powers: set[str], path: str, line: int | None) -> str:
    if not isinstance(value, str):
        raise SchemaError(path, "expected a power name", line)
    if value not in powers:
        raise ConsistencyError(f"{path}: {value!r} is not one of the game's powers")
    return value


def _parse_action(raw: Any, powers: set[str], path: str, line: int | None) -> Action:
    if not isinstance(raw, dict) or len(raw) != 1:
        raise SchemaError(path, "action must be a single-key object", line)
    (kind, arg), = raw.items()
    if kind == "hold":
        if arg is not None:
            raise SchemaError(f"{path}.hold", "expected null", line)
        return Hold()
    if kind == "move":
        return Move(_territory(arg, f"{path}.move", line))
    if kind == "support_hold":
        if not isinstance(arg, dict):
            raise SchemaError(f"{path}.support_hold", "expected object", line)
        return SupportHold(
            _power(arg.get("power"), powers, f"{path}.support_hold.power", line),
            _territory(arg.get("loc"), f"{path}.support_hold.loc", line),
        )
    if kind in ("support_move", "convoy"):
        if not isinstance(arg, dict):
            raise SchemaError(f"{path}.{kind}", "expected object", line)
        cls = SupportMove if kind == "support_move" else Convoy
        return cls(
            _power(arg.get("power"), powers, f"{path}.{kind}.power", line),
            _territory(arg.get("from"), f"{path}.{kind}.from", line),
            _territory(arg.get("to"), f"{path}.{kind}.to", line),
        )
    raise SchemaError(path, f"unknown action {kind!r}", line)


def _parse_order(raw: Any, powers: set[str], path: str, line: int | None) -> Order:
    if not isinstance(raw, dict):
        raise SchemaError(path, "expected object", line)
    power = _power(_require(raw, "power", str, line, f"{path}."), powers, f"{path}.power", line)
    unit = _require(raw, "unit", str, line, f"{path}.")
    if unit not in ("army", "fleet"):
        raise SchemaError(f"{path}.unit", "expected 'army' or 'fleet'", line)
    location = _territory(raw.get("location"), f"{path}.location", line)
    action = _parse_action(raw.get("action"), powers, f"{path}.action", line)
    if isinstance(action, Move) and action.dest == location:
        raise ConsistencyError(f"{path}: move from {location} to itself")
    if isinstance(action, (SupportMove, Convoy)) and action.origin == action.dest:
        raise ConsistencyError(f"{path}: supported/convoyed move from {action.origin} to itself")
    return Order(power, unit, location, action)


def _parse_message(raw: Any, powers: set[str], season_index: int, path: str, line: int | None) -> Message:
    if not isinstance(raw, dict):
        raise SchemaError(path, "expected object", line)
    sender = _require(raw, "from", str, line, f"{path}.")
    recipient = _require(raw, "to", str, line, f"{path}.")
    text = _require(raw, "text", str, line, f"{path}.")
    admin = raw.get("admin", False)
    if not isinstance(admin, bool):
        raise SchemaError(f"{path}.admin", "expected bool", line)
    if not admin:
        # administrator traffic may involve non-player endpoints (e.g. "GM")
        _power(sender, powers, f"{path}.from", line)
        if recipient != BROADCAST:
            _power(recipient, powers, f"{path}.to", line)
            if recipient == sender:
                raise ConsistencyError(f"{path}: message from {sender} to itself")
        if not text.strip():
            raise ConsistencyError(f"{path}: empty message text")
    return Message(sender, recipient, season_index, text, admin)


def _parse_map(raw: Any, powers: set[str], path: str, line: int | None) -> dict[str, str]:
    if not isinstance(raw, dict):
        raise SchemaError(path, "expected object", line)
    out = {}
    for terr, power in raw.items():
        out[_territory(terr, f"{path} key", line)] = _power(power, powers, f"{path}.{terr}", line)
    return out


def game_from_dict(obj: Any, line: int | None = None) -> GameLog:
    if not isinstance(obj, dict):
        raise SchemaError("<record>", "expected a JSON object", line)
    game_id = _require(obj, "game_id", str, line, "")
    variant = _require(obj, "variant", str, line, "")
    raw_powers = _require(obj, "powers", list, line, "")
    if len(raw_powers) != 7 or not all(isinstance(p, str) and p for p in raw_powers):
        raise SchemaError("powers", "expected 7 power names", line)
    if len(set(raw_powers)) != 7:
        raise ConsistencyError(f"game {game_id}: duplicate power names")
    if BROADCAST in raw_powers:
        raise ConsistencyError(f"game {game_id}: {BROADCAST!r} is reserved for broadcasts")
    powers = set(raw_powers)

    raw_seasons = _require(obj, "seasons", list, line, "")
    seasons = []
    previous = None
    for i, rs in enumerate(raw_seasons):
        path = f"seasons[{i}]"
        year = _require(rs, "year", int, line, f"{path}.")
        phase = _require(rs, "phase", str, line, f"{path}.")
        if phase not in PHASES:
            raise SchemaError(f"{path}.phase", "expected 'spring' or 'fall'", line)
        if year < FIRST_YEAR:
            raise ConsistencyError(f"game {game_id}: {path} year {year} precedes {FIRST_YEAR}")
        index = season_ordinal(year, phase)
        if previous is not None and index <= previous:
            raise ConsistencyError(f"game {game_id}: {path} ({year} {phase}) is not after the previous season")
        previous = index
        occupancy = _parse_map(rs.get("occupancy", {}), powers, f"{path}.occupancy", line)
        centers = _parse_map(rs.get("centers", {}), powers, f"{path}.centers", line)
        orders = tuple(
            _parse_order(o, powers, f"{path}.orders[{j}]", line)
            for j, o in enumerate(_require(rs, "orders", list, line, f"{path}."))
        )
        messages = tuple(
            _parse_message(m, powers, index, f"{path}.messages[{j}]", line)
            for j, m in enumerate(_require(rs, "messages", list, line, f"{path}."))
        )
        seasons.append(SeasonRecord(index, year, phase, orders, messages, occupancy, centers))
    return GameLog(game_id, variant, tuple(raw_powers), tuple(seasons))


def parse_game_log(data: bytes | str, line: int = 1) -> GameLog:
    """Parse one JSONL record.

    ``line`` only decorates error messages; column numbers come from the
    JSON decoder.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise RecordSyntaxError(f"invalid UTF-8 ({exc.reason})", line, exc.start + 1) from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise RecordSyntaxError(exc.msg, line + exc.lineno - 1, exc.colno) from None
    return game_from_dict(obj, line)


def iter_corpus(path: str | Path) -> Iterator[GameLog]:
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            yield parse_game_log(raw, lineno)


def load_corpus(path: str | Path) -> list[GameLog]:
    return list(iter_corpus(path))


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def action_to_dict(action: Action) -> dict:
    if isinstance(action, Hold):
        return {"hold": None}
    if isinstance(action, Move):
        return {"move": action.dest}
    if isinstance(action, SupportHold):
        return {"support_hold": {"power": action.target_power, "loc": action.target_loc}}
    key = "support_move" if isinstance(action, SupportMove) else "convoy"
    return {key: {"power": action.target_power, "from": action.origin, "to": action.dest}}


def order_to_dict(order: Order) -> dict:
    return {
        "power": order.power,
        "unit": order.unit,
        "location": order.location,
        "action": action_to_dict(order.action),
    }


def game_to_dict(game: GameLog) -> dict:
    return {
        "game_id": game.game_id,
        "variant": game.variant,
        "powers": list(game.powers),
        "seasons": [
            {
                "year": s.year,
                "phase": s.phase,
                "occupancy": dict(s.occupancy),
                "centers": dict(s.centers),
                "orders": [order_to_dict(o) for o in s.orders],
                "messages": [
                    {"from": m.sender, "to": m.recipient, "text": m.text, "admin": m.admin}
                    for m in s.messages
                ],
            }
            for s in game.seasons
        ],
    }


def dump_game(game: GameLog) -> str:
    return json.dumps(game_to_dict(game), ensure_ascii=False, separators=(",", ":"))


def write_corpus(games: Iterable[GameLog], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for g in games:
            fh.write(dump_game(g))
            fh.write("\n")


# --------------------------------------------------------------------------
# Filtering
# --------------------------------------------------------------------------


def is_player_message(msg: Message, powers: Iterable[str]) -> bool:
    """True for dyadic player-to-player traffic.

    Exporters flag setup and regulatory traffic ``admin``; game-state
    declarations go out as broadcasts.
    """
    powers = set(powers)
    return (
        not msg.admin
        and not msg.is_broadcast
        and msg.sender in powers
        and msg.recipient in powers
        and msg.sender != msg.recipient
    )


def filter_messages(game: GameLog) -> GameLog:
    seasons = tuple(
        replace(s, messages=tuple(m for m in s.messages if is_player_message(m, game.powers)))
        for s in game.seasons
    )
    return replace(game, seasons=seasons)


def standard_only(games: Iterable[GameLog]) -> list[GameLog]:
    # Approximation of dropping "non-standard" games: only the variant tag is checked.
    return [g for g in games if g.variant == "standard"]


# --------------------------------------------------------------------------
# Corpus statistics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Summary:
    n: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float

    def to_dict(self) -> dict:
        return {
            "n": self.n, "min": self.minimum, "q1": self.q1, "median": self.median,
            "q3": self.q3, "max": self.maximum, "mean": self.mean,
        }


def nearest_rank(sorted_values: list, q: float):
    """Lower nearest-rank quantile: the value at 1-based rank ceil(q * n)."""
    n = len(sorted_values)
    rank = max(1, math.ceil(q * n - 1e-12))
    return sorted_values[min(rank, n) - 1]


def summarize(values: Iterable[float]) -> Summary:
    vals = sorted(values)
    if not vals:
        return Summary(0, 0, 0, 0, 0, 0, 0.0)
    return Summary(
        n=len(vals),
        minimum=vals[0],
        q1=nearest_rank(vals, 0.25),
        median=nearest_rank(vals, 0.5),
        q3=nearest_rank(vals, 0.75),
        maximum=vals[-1],
        mean=sum(vals) / len(vals),
    )


@dataclass(frozen=True)
class CorpusStats:
    n_games: int
    n_messages: int
    messages_per_game: Summary
    sentences_per_message: Summary  # messages with at least one sentence
    words_per_sentence: Summary

    def to_dict(self) -> dict:
        return {
            "n_games": self.n_games,
            "n_messages": self.n_messages,
            "messages_per_game": self.messages_per_game.to_dict(),
            "sentences_per_message": self.sentences_per_message.to_dict(),
            "words_per_sentence": self.words_per_sentence.to_dict(),
        }


def corpus_statistics(
    corpus: list[GameLog],
    segment: Callable[[str], list[str]] | None = None,
    tokenize: Callable[[str], list[str]] | None = None,
) -> CorpusStats:
    """Counts and quartiles over an already-filtered corpus."""
    if not corpus:
        raise EmptyCorpus("corpus contains no games")
    if segment is None or tokenize is None:
        from .lingcues.text import segment_sentences, tokenize as _tok

        segment = segment or segment_sentences
        tokenize = tokenize or _tok

    per_game = []
    sents_per_msg = []
    words_per_sent = []
    for game in corpus:
        per_game.append(game.n_messages)
        for season in game.seasons:
            for msg in season.messages:
                sents = segment(msg.text)
                if sents:
                    sents_per_msg.append(len(sents))
                words_per_sent.extend(len(tokenize(s)) for s in sents)
    return CorpusStats(
        n_games=len(corpus),
        n_messages=sum(per_game),
        messages_per_game=summarize(per_game),
        sentences_per_message=summarize(sents_per_msg),
        words_per_sentence=summarize(words_per_sent),
    )
