"""Min-cost flow by successive shortest paths, and the stability-free relaxation network."""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Optional, Sequence

from .instance import Instance


class FlowError(ValueError):
    pass


@dataclass
class FlowNetwork:
    n_nodes: int
    arcs: list[tuple[int, int, int, Real]] = field(default_factory=list)   # (tail, head, cap, cost)
    supplies: list[int] = field(default_factory=list)
    # optional secondary cost, minimised only among primary-optimal flows
    tiebreak: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.supplies:
            self.supplies = [0] * self.n_nodes

    def add_arc(self, u: int, v: int, cap: int, cost: Real = 0, tiebreak: int = 0) -> int:
        if cap < 0 or int(cap) != cap:
            raise FlowError(f"arc capacity must be a nonnegative integer, got {cap}")
        self.arcs.append((u, v, int(cap), cost))
        self.tiebreak.append(tiebreak)
        return len(self.arcs) - 1


@dataclass
class FlowResult:
    flow: list[int]
    cost: Real
    potentials: list[int]


def _integer_costs(net: FlowNetwork) -> list[int]:
    costs = [Fraction(c) if not isinstance(c, float) else Fraction(c).limit_denominator(10**9)
             for _, _, _, c in net.arcs]
    den = 1
    for c in costs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in costs]
    tb = net.tiebreak or [0] * len(ints)
    if any(tb):
        k = sum(abs(t) * a[2] for t, a in zip(tb, net.arcs)) + 1
        ints = [c * k + t for c, t in zip(ints, tb)]
    return ints


def solve_mcf(net: FlowNetwork) -> FlowResult:
    """Minimum-cost flow meeting all supplies exactly.

    Costs may be negative but the network must not contain a negative
    cycle.  Optimality is certified at the end by checking reduced costs of
    every residual arc against the final node potentials.
    """
    if sum(net.supplies) != 0:
        raise FlowError("supplies do not balance")
    costs = _integer_costs(net)
    n = net.n_nodes
    src, snk = n, n + 1
    N = n + 2
    head: list[int] = []
    cap: list[int] = []
    cost: list[int] = []
    adj: list[list[int]] = [[] for _ in range(N)]

    def add(u, v, c, w):
        adj[u].append(len(head)); head.append(v); cap.append(c); cost.append(w)
        adj[v].append(len(head)); head.append(u); cap.append(0); cost.append(-w)

    for (u, v, c, _), w in zip(net.arcs, costs):
        add(u, v, c, w)
    need = 0
    for v, b in enumerate(net.supplies):
        if b > 0:
            add(src, v, b, 0)
            need += b
        elif b < 0:
            add(v, snk, -b, 0)

    # initial potentials by Bellman-Ford (queue based) over arcs with capacity
    pot = [0] * N
    inq = [True] * N
    queue = deque(range(N))
    relax_count = 0
    while queue:
        u = queue.popleft()
        inq[u] = False
        for e in adj[u]:
            if cap[e] > 0 and pot[u] + cost[e] < pot[head[e]]:
                pot[head[e]] = pot[u] + cost[e]
                relax_count += 1
                if relax_count > N * len(head) + 1:
                    raise FlowError("negative cycle in network")
                if not inq[head[e]]:
                    inq[head[e]] = True
                    queue.append(head[e])

    sent = 0
    INF = float("inf")
    while sent < need:
        dist = [INF] * N
        prev = [-1] * N
        dist[src] = 0
        pq = [(0, src)]
        while pq:
            d, u = heapq.heappop(pq)
            if d > dist[u]:
                continue
            for e in adj[u]:
                if cap[e] > 0:
                    v = head[e]
                    nd = d + cost[e] + pot[u] - pot[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        prev[v] = e
                        heapq.heappush(pq, (nd, v))
        if dist[snk] == INF:
            raise FlowError("infeasible network: supplies cannot be routed")
        lim = dist[snk]
        for v in range(N):
            pot[v] += min(dist[v], lim)
        push = need - sent
        v = snk
        while v != src:
            e = prev[v]
            push = min(push, cap[e])
            v = head[e ^ 1]
        v = snk
        while v != src:
            e = prev[v]
            cap[e] -= push
            cap[e ^ 1] += push
            v = head[e ^ 1]
        sent += push

    for u in range(N):
        for e in adj[u]:
            if cap[e] > 0 and cost[e] + pot[u] - pot[head[e]] < 0:
                raise FlowError("optimality certificate failed")  # pragma: no cover
    flow = [cap[2 * i + 1] for i in range(len(net.arcs))]
    total = sum(f * a[3] for f, a in zip(flow, net.arcs))
    return FlowResult(flow, total, pot[:n])


@dataclass
class RelaxedNetwork:
    net: FlowNetwork
    assign_arc: dict[tuple[int, Optional[int]], int]
    budget_arc: dict[int, int]

    def decode(self, res: FlowResult, inst: Instance):
        """(assignment, t) from an integral flow."""
        assign: list[Optional[int]] = [None] * inst.n_students
        for (s, c), a in self.assign_arc.items():
            if res.flow[a]:
                assign[s] = c
        t = [0] * inst.n_schools
        for c, a in self.budget_arc.items():
            t[c] = res.flow[a]
        return tuple(assign), tuple(t)


def build_relaxed_network(inst: Instance, budget: Optional[int] = None,
                          prefer_regular_seats: bool = True) -> RelaxedNetwork:
    """Network whose min-cost flow is an optimal (x, t) with stability dropped.

    With ``prefer_regular_seats`` the school->budget arcs carry a secondary
    unit cost so that extra seats are drawn only where regular seats run
    out; the primary objective is unaffected.
    """
    B = inst.budget if budget is None else budget
    n, m = inst.n_students, inst.n_schools
    # nodes: source, students, schools, empty, budget, sink
    S0 = 1
    C0 = S0 + n
    EMPTY = C0 + m
    BUD = EMPTY + 1
    SINK = BUD + 1
    net = FlowNetwork(SINK + 1)
    net.supplies[0] = n
    net.supplies[SINK] = -n
    assign_arc: dict[tuple[int, Optional[int]], int] = {}
    budget_arc: dict[int, int] = {}
    for s in range(n):
        net.add_arc(0, S0 + s, 1, 0)
        for r, c in enumerate(inst.prefs[s], start=1):
            assign_arc[(s, c)] = net.add_arc(S0 + s, C0 + c, 1, r)
        assign_arc[(s, None)] = net.add_arc(S0 + s, EMPTY, 1, inst.penalties[s])
    for c in range(m):
        net.add_arc(C0 + c, SINK, inst.capacities[c], 0)
        cb = B if inst.bounds[c] is None else min(B, inst.bounds[c])
        budget_arc[c] = net.add_arc(C0 + c, BUD, cb, 0, 1 if prefer_regular_seats else 0)
    net.add_arc(BUD, SINK, B, 0)
    net.add_arc(EMPTY, SINK, n, 0)
    return RelaxedNetwork(net, assign_arc, budget_arc)


def solve_relaxed(inst: Instance, budget: Optional[int] = None):
    """(assignment, t, objective) of the stability-free optimum."""
    rn = build_relaxed_network(inst, budget)
    res = solve_mcf(rn.net)
    assign, t = rn.decode(res, inst)
    return assign, t, res.cost
