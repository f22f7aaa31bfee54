"""Literal double-loop versions of the measures, kept naive on purpose.

Nothing here imports from the package under test except data containers,
so agreement with the vectorized code is an independent check.
"""

from __future__ import annotations

import math


def _comparable(ti, ei, tj, ej) -> bool:
    if ei != 1:
        return False
    return ti < tj or (ti == tj and ej == 0)


def harrell(phi, times, events):
    """Return (comparable, concordant, tied) with phi higher = riskier."""
    n = len(phi)
    comp = conc = tied = 0
    for i in range(n):
        for j in range(n):
            if i != j and _comparable(times[i], events[i], times[j], events[j]):
                comp += 1
                if phi[i] > phi[j]:
                    conc += 1
                elif phi[i] == phi[j]:
                    tied += 1
    return comp, conc, tied


def censoring_km_left(train_times, train_events, t):
    """KM of censoring evaluated just before t, by walking sorted distinct times."""
    g = 1.0
    for u in sorted(set(train_times)):
        if u >= t:
            break
        at_risk = sum(1 for x in train_times if x >= u)
        cens = sum(1 for x, e in zip(train_times, train_events) if x == u and e == 0)
        g *= 1.0 - cens / at_risk
    return g


def uno(phi, times, events, train_times, train_events, tau=None):
    if tau is None:
        tau = max(t for t, e in zip(times, events) if e == 1)
    n = len(phi)
    num = den = 0.0
    comp = conc = tied = 0
    for i in range(n):
        if not times[i] < tau:
            continue
        w = None
        for j in range(n):
            if i != j and _comparable(times[i], events[i], times[j], events[j]):
                if w is None:
                    w = censoring_km_left(train_times, train_events, times[i]) ** -2
                comp += 1
                den += w
                if phi[i] > phi[j]:
                    conc += 1
                    num += w
                elif phi[i] == phi[j]:
                    tied += 1
                    num += 0.5 * w
    return num / den, comp, conc, tied


def step_value(grid, probs, t):
    value = 1.0
    for g, p in zip(grid, probs):
        if g <= t:
            value = p
    return value


def antolini(grid, S, times, events):
    n = len(times)
    comp = conc = tied = 0
    for i in range(n):
        for j in range(n):
            if i != j and _comparable(times[i], events[i], times[j], events[j]):
                comp += 1
                si = step_value(grid, S[i], times[i])
                sj = step_value(grid, S[j], times[i])
                if si < sj:
                    conc += 1
                elif si == sj:
                    tied += 1
    return comp, conc, tied


def mann_whitney_auc(phi, times, events, t):
    cases = [p for p, x, e in zip(phi, times, events) if x <= t and e == 1]
    controls = [p for p, x in zip(phi, times) if x > t]
    score = 0.0
    for a in cases:
        for b in controls:
            score += 1.0 if a > b else 0.5 if a == b else 0.0
    return score / (len(cases) * len(controls))


def breslow_loglik(beta, times, events, X):
    """Partial log-likelihood with Breslow ties, one subject at a time."""
    ll = 0.0
    for i in range(len(times)):
        if events[i] != 1:
            continue
        eta_i = sum(b * x for b, x in zip(beta, X[i]))
        denom = 0.0
        for j in range(len(times)):
            if times[j] >= times[i]:
                denom += math.exp(sum(b * x for b, x in zip(beta, X[j])))
        ll += eta_i - math.log(denom)
    return ll


def kaplan_meier(times, events):
    out, s = [], 1.0
    for u in sorted(set(times)):
        n = sum(1 for x in times if x >= u)
        d = sum(1 for x, e in zip(times, events) if x == u and e == 1)
        s *= 1.0 - d / n
        out.append((u, s))
    return out
