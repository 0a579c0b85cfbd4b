#!/usr/bin/env python3
"""Writes the kenya-style example scenario.

The probabilities are illustrative: they are shaped like rural East African
demographics (young age pyramid, early marriage for women, some polygyny,
large families) but are not taken from any survey table.

    python3 build_scenario.py          # rewrite the JSON files
    python3 build_scenario.py --check  # print supply/demand per age slice
"""
import json
import math
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent

AGES = list(range(80))
SLICES = [f"{5 * s}-{5 * s + 4}" for s in range(16)]
GENDERS = ["male", "female"]
YESNO = ["yes", "no"]
WORK = ["none", "farming", "trade", "teaching"]
LOCATIONS = ["Kisumu", "Siaya", "Homa Bay", "Migori", "Kisii", "Bondo"]
COUNTS = [str(i) for i in range(11)]


def normalize(row):
    total = sum(row)
    return [x / total for x in row]


def var(name, domain, parents, cpt):
    for row in cpt:
        assert len(row) == len(domain), name
        assert abs(sum(row) - 1.0) < 1e-9, (name, row)
    return {"name": name, "domain": domain, "parents": parents, "cpt": cpt}


def rows(*domains):
    """Parent configurations, last parent fastest."""
    if not domains:
        yield ()
        return
    for head in range(len(domains[0])):
        for tail in rows(*domains[1:]):
            yield (head,) + tail


def one_hot(i, n):
    return [1.0 if j == i else 0.0 for j in range(n)]


def counts_row(weights):
    """weights: {count: weight} -> distribution over COUNTS."""
    row = [0.0] * len(COUNTS)
    for k, w in weights.items():
        row[k] = w
    return normalize(row)


# --- agent network ---------------------------------------------------------

AGE_PRIOR = normalize([math.exp(-0.032 * a) for a in AGES])
SLICE_PRIOR = [sum(AGE_PRIOR[5 * s: 5 * s + 5]) for s in range(16)]
LOCATION_PRIOR = [0.2, 0.18, 0.17, 0.16, 0.15, 0.14]

MARRIED = {
    "male": [0, 0, 0, 0, 0.06, 0.35, 0.62, 0.75, 0.8, 0.8, 0.8, 0.78, 0.75, 0.7, 0.6, 0.5],
    "female": [0, 0, 0, 0.3, 0.65, 0.8, 0.85, 0.86, 0.86, 0.85, 0.82, 0.78, 0.72, 0.66, 0.6, 0.55],
}

# Living children per woman, by age slice: {count: weight}.
CHILDREN = {
    3: {0: 0.8, 1: 0.17, 2: 0.03},
    4: {0: 0.38, 1: 0.35, 2: 0.2, 3: 0.07},
    5: {0: 0.18, 1: 0.25, 2: 0.3, 3: 0.18, 4: 0.09},
    6: {0: 0.12, 1: 0.15, 2: 0.25, 3: 0.25, 4: 0.15, 5: 0.08},
    7: {0: 0.1, 1: 0.1, 2: 0.2, 3: 0.25, 4: 0.2, 5: 0.1, 6: 0.05},
    8: {0: 0.1, 1: 0.08, 2: 0.17, 3: 0.23, 4: 0.22, 5: 0.12, 6: 0.08},
    9: {0: 0.1, 1: 0.08, 2: 0.15, 3: 0.22, 4: 0.22, 5: 0.14, 6: 0.09},
    10: {0: 0.1, 1: 0.08, 2: 0.15, 3: 0.22, 4: 0.22, 5: 0.14, 6: 0.09},
    11: {0: 0.1, 1: 0.1, 2: 0.16, 3: 0.22, 4: 0.2, 5: 0.14, 6: 0.08},
    12: {0: 0.12, 1: 0.12, 2: 0.2, 3: 0.22, 4: 0.18, 5: 0.11, 6: 0.05},
    13: {0: 0.15, 1: 0.15, 2: 0.22, 3: 0.2, 4: 0.16, 5: 0.12},
    14: {0: 0.18, 1: 0.22, 2: 0.25, 3: 0.2, 4: 0.15},
    15: {0: 0.22, 1: 0.28, 2: 0.25, 3: 0.17, 4: 0.08},
}


# Child age slice offset (mother slice - child slice) -> weight.
CHILD_OFFSETS = {3: 0.14, 4: 0.2, 5: 0.2, 6: 0.17, 7: 0.13, 8: 0.1, 9: 0.06}
# Wife age slice offset (husband slice - wife slice) -> weight.
WIFE_OFFSETS = {0: 0.05, 1: 0.25, 2: 0.45, 3: 0.25}


def work_row(g, s):
    if s < 3:
        return one_hot(0, len(WORK))
    if s == 3:
        return [0.6, 0.3, 0.1, 0.0]
    if s >= 13:
        return [0.55, 0.35, 0.1, 0.0]
    return [0.1, 0.6, 0.2, 0.1] if g == 0 else [0.2, 0.6, 0.15, 0.05]


COLLEAGUES = {
    0: {0: 1.0},
    1: {1: 0.2, 2: 0.35, 3: 0.3, 4: 0.15},
    2: {1: 0.15, 2: 0.3, 3: 0.3, 4: 0.15, 5: 0.1},
    3: {2: 0.2, 3: 0.3, 4: 0.3, 5: 0.15, 6: 0.05},
}


def friends_row(s):
    if s < 2:
        return counts_row({0: 1.0})
    if s < 4:
        return counts_row({1: 0.2, 2: 0.35, 3: 0.3, 4: 0.15})
    if s < 13:
        return counts_row({0: 0.05, 1: 0.2, 2: 0.35, 3: 0.25, 4: 0.15})
    return counts_row({0: 0.1, 1: 0.3, 2: 0.35, 3: 0.2, 4: 0.05})


def married_rows():
    return [
        [MARRIED[GENDERS[g]][s], 1 - MARRIED[GENDERS[g]][s]]
        for g, s in rows(GENDERS, SLICES)
    ]


def agent_network():
    v = []
    v.append(var("gender", GENDERS, [], [[0.5, 0.5]]))
    v.append(var("ageDetail", [str(a) for a in AGES], [], [AGE_PRIOR]))
    v.append(var("ageSlices", SLICES, ["ageDetail"], [one_hot(a // 5, 16) for a in AGES]))
    v.append(var("married", YESNO, ["gender", "ageSlices"], married_rows()))
    v.append(var("work", WORK, ["gender", "ageSlices"], [work_row(g, s) for g, s in rows(GENDERS, SLICES)]))
    v.append(var("location", LOCATIONS, [], [LOCATION_PRIOR]))
    spouses = []
    for g, m in rows(GENDERS, YESNO):
        if m == 1:
            spouses.append(counts_row({0: 1.0}))
        elif g == 0:
            spouses.append(counts_row({1: 0.88, 2: 0.1, 3: 0.02}))
        else:
            spouses.append(counts_row({1: 1.0}))
    v.append(var("RC_spouses", COUNTS, ["gender", "married"], spouses))
    mothers = []
    for g, s in rows(GENDERS, SLICES):
        mothers.append(counts_row(CHILDREN.get(s, {0: 1.0}) if g == 1 else {0: 1.0}))
    v.append(var("RC_motherOf", COUNTS, ["gender", "ageSlices"], mothers))
    v.append(var("RC_colleagues", COUNTS, ["work"], [counts_row(COLLEAGUES[w]) for w in range(len(WORK))]))
    v.append(var("RC_friends", COUNTS, ["ageSlices"], [friends_row(s) for s in range(16)]))
    return v


# --- matching networks -----------------------------------------------------

def copy_vars(prefix, names):
    out = []
    p = lambda n: f"{prefix}.{n}"
    if "gender" in names:
        out.append(var(p("gender"), GENDERS, [], [[0.5, 0.5]]))
    if "ageSlices" in names:
        out.append(var(p("ageSlices"), SLICES, [], [SLICE_PRIOR]))
    if "married" in names:
        out.append(var(p("married"), YESNO, [p("gender"), p("ageSlices")], married_rows()))
    if "work" in names:
        # Marginal of work given gender and age is folded into a single prior.
        prior = [0.0] * len(WORK)
        for g in range(2):
            for s in range(16):
                for w, x in enumerate(work_row(g, s)):
                    prior[w] += 0.5 * SLICE_PRIOR[s] * x
        out.append(var(p("work"), WORK, [], [normalize(prior)]))
    if "location" in names:
        out.append(var(p("location"), LOCATIONS, [], [LOCATION_PRIOR]))
    return out


def yes_if(cond):
    return [1.0, 0.0] if cond else [0.0, 1.0]


def identity(name, a, b, n):
    return var(name, YESNO, [a, b], [yes_if(i == j) for i, j in rows(range(n), range(n))])


def all_yes(name, parents):
    return var(name, YESNO, parents, [yes_if(all(x == 0 for x in r)) for r in rows(*[YESNO] * len(parents))])


def offset_row(s, offsets, lowest):
    row = [0.0] * 16
    for k, w in offsets.items():
        if 0 <= s - k and s - k >= lowest:
            row[s - k] += w
    if sum(row) == 0:
        row[max(lowest, 0)] = 1.0
    return normalize(row)


def spouses_network():
    attrs = ["gender", "ageSlices", "married", "location"]
    v = copy_vars("a1", attrs) + copy_vars("a2", attrs)
    v.append(var("husband", YESNO, ["a1.gender", "a1.married"],
                 [yes_if(g == 0 and m == 0) for g, m in rows(GENDERS, YESNO)]))
    v.append(var("wife", YESNO, ["a2.gender", "a2.married"],
                 [yes_if(g == 1 and m == 0) for g, m in rows(GENDERS, YESNO)]))
    v.append(var("ageWife", SLICES, ["a1.ageSlices"], [offset_row(s, WIFE_OFFSETS, 3) for s in range(16)]))
    v.append(identity("rightAge", "ageWife", "a2.ageSlices", 16))
    v.append(identity("sameLocation", "a1.location", "a2.location", len(LOCATIONS)))
    v.append(all_yes("linkSpouses", ["husband", "wife", "rightAge", "sameLocation"]))
    return v


def mother_network():
    v = copy_vars("a1", ["gender", "ageSlices", "location"]) + copy_vars("a2", ["ageSlices", "location"])
    v.append(var("mother", YESNO, ["a1.gender"], [yes_if(g == 1) for (g,) in rows(GENDERS)]))
    v.append(var("childAge", SLICES, ["a1.ageSlices"], [offset_row(s, CHILD_OFFSETS, 0) for s in range(16)]))
    v.append(identity("rightChildAge", "childAge", "a2.ageSlices", 16))
    # Children under 20 live with their mother.
    v.append(var("homeOk", YESNO, ["a2.ageSlices", "a1.location", "a2.location"],
                 [yes_if(s >= 4 or l1 == l2) for s, l1, l2 in rows(SLICES, LOCATIONS, LOCATIONS)]))
    v.append(all_yes("linkMotherOf", ["mother", "rightChildAge", "homeOk"]))
    return v


def colleagues_network():
    v = copy_vars("a1", ["work", "location"]) + copy_vars("a2", ["work", "location"])
    v.append(var("worker", YESNO, ["a1.work"], [yes_if(w != 0) for (w,) in rows(WORK)]))
    v.append(identity("sameWork", "a1.work", "a2.work", len(WORK)))
    # Traders meet across locations; everyone else works locally.
    v.append(var("workplace", YESNO, ["a1.work", "a1.location", "a2.location"],
                 [yes_if(w == 2 or l1 == l2) for w, l1, l2 in rows(WORK, LOCATIONS, LOCATIONS)]))
    v.append(all_yes("linkColleagues", ["worker", "sameWork", "workplace"]))
    return v


def friends_network():
    v = copy_vars("a1", ["ageSlices", "location"]) + copy_vars("a2", ["ageSlices", "location"])
    v.append(var("oldEnough", YESNO, ["a1.ageSlices"], [yes_if(s >= 2) for s in range(16)]))
    v.append(var("friendAge", SLICES, ["a1.ageSlices"],
                 [normalize([{0: 0.6, 1: 0.2, -1: 0.2}.get(t - s, 0.0) for t in range(16)]) for s in range(16)]))
    v.append(identity("rightAge", "friendAge", "a2.ageSlices", 16))
    far = 0.08 / (len(LOCATIONS) - 1)
    v.append(var("friendLocation", LOCATIONS, ["a1.location"],
                 [[0.92 if j == i else far for j in range(len(LOCATIONS))] for i in range(len(LOCATIONS))]))
    v.append(identity("rightLocation", "friendLocation", "a2.location", len(LOCATIONS)))
    v.append(all_yes("linkFriends", ["oldEnough", "rightAge", "rightLocation"]))
    return v


def scenario():
    return {
        "format_version": 1,
        "agent_bn": "agents.bn.json",
        "population_size": 10000,
        "seed": 20071,
        "link_types": [
            {"name": "spouses", "kind": "matching", "directed": False, "bn": "spouses.bn.json",
             "link_variable": "linkSpouses", "rc_a": "RC_spouses", "rc_b": "RC_spouses"},
            {"name": "motherOf", "kind": "matching", "directed": True, "bn": "motherOf.bn.json",
             "link_variable": "linkMotherOf", "rc_a": "RC_motherOf", "rc_b": 1},
            {"name": "colleagues", "kind": "matching", "directed": False, "same": True,
             "bn": "colleagues.bn.json", "link_variable": "linkColleagues", "rc_a": "RC_colleagues"},
            {"name": "friends", "kind": "matching", "directed": False, "same": True,
             "bn": "friends.bn.json", "link_variable": "linkFriends", "rc_a": "RC_friends"},
            {"name": "fatherOf", "kind": "transitive", "directed": True},
            {"name": "siblings", "kind": "transitive", "directed": False},
            {"name": "friendsOfFriends", "kind": "transitive", "directed": False},
        ],
        "transitive_rules": [
            {"create": "fatherOf", "hop1": {"type": "spouses", "orientation": "either"},
             "hop2": {"type": "motherOf", "orientation": "forward"}, "probability": 1.0,
             "create_directed_from": "start"},
            {"create": "siblings", "hop1": {"type": "motherOf", "orientation": "backward"},
             "hop2": {"type": "motherOf", "orientation": "forward"}, "probability": 1.0},
            {"create": "friendsOfFriends", "hop1": {"type": "friends", "orientation": "either"},
             "hop2": {"type": "friends", "orientation": "either"}, "probability": 0.1},
        ],
        "interaction_weights": {
            "spouses": 0.2, "motherOf": 0.3, "fatherOf": 0.15, "colleagues": 0.4,
            "friends": 0.7, "siblings": 0.5, "friendsOfFriends": 0.3,
        },
    }


def expected_rc(weights):
    d = counts_row(weights)
    return sum(k * p for k, p in enumerate(d))


def proposal(row, supply):
    """Peer prototypes follow the posterior, which weights the target
    slice by how common matching agents are."""
    w = [r * x for r, x in zip(row, supply)]
    return normalize(w) if sum(w) > 0 else row


def check():
    """Expected demand vs supply per target age slice, per 1000 agents."""
    n = 1000
    men = [n * 0.5 * p for p in SLICE_PRIOR]
    women = men[:]
    rc_h = expected_rc({1: 0.88, 2: 0.1, 3: 0.02})
    wife_supply = [SLICE_PRIOR[w] * MARRIED["female"][w] for w in range(16)]
    child_supply = SLICE_PRIOR
    print("wives: slice demand supply ratio")
    for w in range(16):
        demand = sum(men[s] * MARRIED["male"][s] * rc_h * proposal(offset_row(s, WIFE_OFFSETS, 3), wife_supply)[w]
                     for s in range(16))
        supply = women[w] * MARRIED["female"][w]
        print(f"  {SLICES[w]:>6} {demand:7.2f} {supply:7.2f} {demand / supply if supply else float('nan'):5.2f}")
    print("children: slice demand supply ratio")
    for c in range(16):
        demand = sum(women[m] * expected_rc(CHILDREN.get(m, {0: 1.0}))
                     * proposal(offset_row(m, CHILD_OFFSETS, 0), child_supply)[c]
                     for m in range(3, 16))
        supply = men[c] + women[c]
        print(f"  {SLICES[c]:>6} {demand:7.2f} {supply:7.2f} {demand / supply:5.2f}")


def write(name, variables):
    doc = {"format_version": 1, "variables": variables}
    (HERE / name).write_text(json.dumps(doc, indent=1) + "\n")


def main():
    if "--check" in sys.argv:
        check()
        return
    write("agents.bn.json", agent_network())
    write("spouses.bn.json", spouses_network())
    write("motherOf.bn.json", mother_network())
    write("colleagues.bn.json", colleagues_network())
    write("friends.bn.json", friends_network())
    (HERE / "kenya.scenario.json").write_text(json.dumps(scenario(), indent=2) + "\n")


if __name__ == "__main__":
    main()
