"""MiniZinc models: the plain time-indexed model and the cumulative model.

Each encoder returns a :class:`MiniZincModel` holding a generic ``.mzn``
model and the instance-specific ``.dzn`` data.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..model import Instance, build_grid, check_instance


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class MiniZincModel:
    model: str
    data: str

    def combined(self) -> str:
        """Model and data in one file, for solvers given a single path."""
        return self.model + "\n% --- data ---\n" + self.data


@dataclass(frozen=True)
class SplitPlan:
    n: int
    remainder: int
    rate: int

    @property
    def pieces(self) -> list[int]:
        return [self.rate] * self.n + ([self.remainder] if self.remainder else [])


def split_discharge(duration: int, flow: int, tank_flow: int) -> SplitPlan:
    """Cut a discharge's volume into unit pieces of the tank's output rate.

    ``duration * flow == tank_flow * n + remainder`` with
    ``0 <= remainder < tank_flow``.
    """
    if duration <= 0 or flow <= 0:
        raise ValueError("duration and flow must be positive")
    if tank_flow <= 0:
        raise EncodingError("tank_flow = 0: a buffered discharge could never be emptied")
    n, rem = divmod(duration * flow, tank_flow)
    return SplitPlan(n, rem, tank_flow)


def _array(values) -> str:
    return "[" + ", ".join(str(v) for v in values) + "]"


def _bool(b: bool) -> str:
    return "true" if b else "false"


def _common_data(instance: Instance) -> list[str]:
    d = build_grid(instance)
    inds = instance.industries
    flat = [x for row in d for x in row]
    dis = list(instance.discharges())
    return [
        f"k = {instance.k};",
        f"m = {instance.periods};",
        f"plant_capacity = {instance.plant_capacity};",
        f"tank_capacity = {_array(ind.tank_capacity for ind in inds)};",
        f"tank_flow = {_array(ind.tank_flow for ind in inds)};",
        f"d = array2d(1..{instance.k}, 1..{instance.periods}, {_array(flat)});",
        f"n = {len(dis)};",
        f"dis_industry = {_array(i + 1 for i, _ in dis)};",
        f"dis_start = {_array(x.start for _, x in dis)};",
        f"dis_end = {_array(x.end for _, x in dis)};",
        f"dis_flow = {_array(x.flow for _, x in dis)};",
    ]


_NAIVE_MODEL = """\
% wwtpp, time-indexed model: no global constraints, default search
int: k;
int: m;
int: plant_capacity;
set of int: IND = 1..k;
set of int: PER = 1..m;
array[IND] of int: tank_capacity;
array[IND] of int: tank_flow;
array[IND, PER] of int: d;
int: n;
set of int: DIS = 1..n;
array[DIS] of IND: dis_industry;
array[DIS] of PER: dis_start;
array[DIS] of PER: dis_end;
array[DIS] of int: dis_flow;
int: max_flow;
int: max_volume;

array[IND, PER] of var 0..max_flow: c;
array[IND, PER] of var 0..max_volume: bout;
array[IND, PER] of var 0..max_volume: buf;

% c is only meaningful where a discharge is scheduled
constraint forall(i in IND, j in PER where d[i, j] = 0)(c[i, j] = 0);

% plant capacity
constraint forall(j in PER)(sum(i in IND)(c[i, j] + bout[i, j]) <= plant_capacity);

% buffer balance
constraint forall(i in IND)(buf[i, 1] = d[i, 1] - c[i, 1]);
constraint forall(i in IND, j in 2..m)(
  buf[i, j] = buf[i, j - 1] - bout[i, j] + d[i, j] - c[i, j]);

% tank capacity
constraint forall(i in IND, j in 2..m - 1)(buf[i, j] <= tank_capacity[i]);

% empty at the deadline
constraint forall(i in IND)(buf[i, m] = 0);

% buffer output
constraint forall(i in IND)(bout[i, 1] = 0);
constraint forall(i in IND, j in 2..m)(
  bout[i, j] = 0
  \\/ (bout[i, j] = tank_flow[i] /\\ buf[i, j - 1] >= tank_flow[i])
  \\/ (bout[i, j] = buf[i, j - 1] /\\ buf[i, j - 1] <= tank_flow[i]));

% each discharge goes entirely to the river or to the buffer
constraint forall(p in DIS)(
  forall(j in dis_start[p]..dis_end[p])(c[dis_industry[p], j] = 0)
  \\/ forall(j in dis_start[p]..dis_end[p])(c[dis_industry[p], j] = dis_flow[p]));

% redundant output bounds
constraint forall(i in IND, j in 2..m)(
  0 <= bout[i, j] /\\ bout[i, j] <= tank_flow[i] /\\ bout[i, j] <= buf[i, j - 1]);

solve satisfy;
"""


def encode_minizinc_naive(instance: Instance) -> MiniZincModel:
    check_instance(instance)
    d = build_grid(instance)
    max_flow = max((x for row in d for x in row), default=0)
    max_volume = max((ind.volume for ind in instance.industries), default=0)
    data = _common_data(instance) + [
        f"max_flow = {max_flow};",
        f"max_volume = {max_volume};",
    ]
    return MiniZincModel(_NAIVE_MODEL, "\n".join(data) + "\n")


_CUMULATIVE_MODEL = """\
% wwtpp, cumulative model
% A buffered discharge of volume V into a tank of output rate r is cut into
% unit-duration pieces: V div r pieces of size r plus one remainder piece.
% Remainders of different discharges are never merged, so this model may
% reject schedules the time-indexed model accepts.
%
% A piece occupies the tank from its discharge's start I up to the period
% before its flush time H, and is flushed in period H.  H must be after the
% period by which the piece's water has fully arrived (piece_ready < H <= m);
% water arriving in a period cannot leave the tank in that same period.
include "cumulative.mzn";

int: k;
int: m;
int: plant_capacity;
set of int: IND = 1..k;
set of int: PER = 1..m;
array[IND] of int: tank_capacity;
array[IND] of int: tank_flow;
array[IND, PER] of int: d;
int: n;
set of int: DIS = 1..n;
array[DIS] of IND: dis_industry;
array[DIS] of PER: dis_start;
array[DIS] of PER: dis_end;
array[DIS] of int: dis_flow;

int: np;
set of int: PIECE = 1..np;
array[PIECE] of DIS: piece_dis;
array[PIECE] of int: piece_size;
array[PIECE] of PER: piece_ready;
% true when piece q + 1 is an identical full-size piece of the same discharge
array[PIECE] of bool: piece_same_as_next;

array[DIS] of var bool: river;
array[PIECE] of var 0..max(piece_size ++ [0]): C;
array[PIECE] of var PER: H;

% a piece requires nothing iff its discharge goes to the river
constraint forall(q in PIECE)(
  (C[q] = 0 <-> river[piece_dis[q]]) /\\ (C[q] = 0 \\/ C[q] = piece_size[q]));

% flush strictly after the piece's water has arrived
constraint forall(q in PIECE)(H[q] > piece_ready[q]);

% plant capacity: river discharges plus flushed pieces
constraint cumulative(
  [dis_start[p] | p in DIS] ++ [H[q] | q in PIECE],
  [dis_end[p] - dis_start[p] + 1 | p in DIS] ++ [1 | q in PIECE],
  [bool2int(river[p]) * dis_flow[p] | p in DIS] ++ [C[q] | q in PIECE],
  plant_capacity);

% output rate of each tank
constraint forall(i in IND)(
  cumulative(
    [H[q] | q in PIECE where dis_industry[piece_dis[q]] = i],
    [1 | q in PIECE where dis_industry[piece_dis[q]] = i],
    [C[q] | q in PIECE where dis_industry[piece_dis[q]] = i],
    tank_flow[i]));

% capacity of each tank
constraint forall(i in IND)(
  cumulative(
    [dis_start[piece_dis[q]] | q in PIECE where dis_industry[piece_dis[q]] = i],
    [H[q] - dis_start[piece_dis[q]] | q in PIECE where dis_industry[piece_dis[q]] = i],
    [C[q] | q in PIECE where dis_industry[piece_dis[q]] = i],
    tank_capacity[i]));

% a tank releases nothing, its full rate, or everything it held
constraint forall(i in IND, t in 2..m)(
  let {
    var int: out = sum(q in PIECE where dis_industry[piece_dis[q]] = i)(
      bool2int(H[q] = t) * C[q]);
    var int: flushed = sum(q in PIECE where dis_industry[piece_dis[q]] = i)(
      bool2int(H[q] <= t) * C[q]);
    var int: arrived = sum(p in DIS where dis_industry[p] = i)(
      bool2int(not river[p]) * dis_flow[p]
      * max(0, min(dis_end[p], t - 1) - dis_start[p] + 1));
  } in out = 0 \\/ out = tank_flow[i] \\/ flushed = arrived);

% symmetry breaking between identical pieces of one discharge
constraint forall(q in PIECE where piece_same_as_next[q])(H[q] <= H[q + 1]);

solve satisfy;
"""


def encode_minizinc_cumulative(instance: Instance) -> MiniZincModel:
    check_instance(instance)
    piece_dis, piece_size, piece_ready, same_next = [], [], [], []
    for n, (i, dis) in enumerate(instance.discharges(), start=1):
        ind = instance.industries[i]
        try:
            plan = split_discharge(dis.duration, dis.flow, ind.tank_flow)
        except EncodingError as exc:
            raise EncodingError(f"industry {ind.id!r}: {exc}") from None
        sizes = plan.pieces
        arrived = 0
        for q, size in enumerate(sizes):
            arrived += size
            # first period by which this piece and all before it have arrived
            ready = dis.start - 1 + -(-arrived // dis.flow)
            piece_dis.append(n)
            piece_size.append(size)
            piece_ready.append(min(ready, dis.end))
            same_next.append(q + 1 < plan.n)
    data = _common_data(instance) + [
        f"np = {len(piece_dis)};",
        f"piece_dis = {_array(piece_dis)};",
        f"piece_size = {_array(piece_size)};",
        f"piece_ready = {_array(piece_ready)};",
        f"piece_same_as_next = {_array(_bool(b) for b in same_next)};",
    ]
    return MiniZincModel(_CUMULATIVE_MODEL, "\n".join(data) + "\n")
