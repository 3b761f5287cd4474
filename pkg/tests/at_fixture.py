"""The worked telecom-organization fixture shared across the test suite.

Four objectives (weights 0.2/0.2/0.3/0.3), five risks, a dense 5x4 impact
matrix, tolerance 0.25, and three countermeasures with their reduction
matrix. Expected values derived from this data are frozen in the tests
that use them.
"""

OBJECTIVES = [
    ("o1", "Enhance customer trust and build relationships", 0.2),
    ("o2", "Boost employee knowledge sharing", 0.2),
    ("o3", "Provide perfect customer services", 0.3),
    ("o4", "Increase profitability, decrease operational costs", 0.3),
]

RISKS = [
    ("r1", "Account hijacking", 0.6),
    ("r2", "Data leakage", 0.2),
    ("r3", "Denial of services", 0.5),
    ("r4", "Insecure VM migration", 0.7),
    ("r5", "Sniffing/spoofing virtual networks", 0.3),
]

# risk id -> objective id -> impact
IMPACTS = {
    "r1": {"o1": 0.65, "o2": 0.85, "o3": 0.75, "o4": 0.8},
    "r2": {"o1": 0.15, "o2": 0.35, "o3": 0.8, "o4": 0.65},
    "r3": {"o1": 0.4, "o2": 0.3, "o3": 0.25, "o4": 0.1},
    "r4": {"o1": 0.85, "o2": 0.8, "o3": 0.7, "o4": 0.6},
    "r5": {"o1": 0.1, "o2": 0.3, "o3": 0.7, "o4": 0.2},
}

ALPHA = 0.25

# countermeasure id -> risk id -> level reduction (0 where inapplicable)
REDUCTIONS = {
    "c1": {"r1": 0.8, "r2": 0.0, "r3": 0.0, "r4": 0.0, "r5": 0.0},
    "c2": {"r1": 0.9, "r2": 0.0, "r3": 0.0, "r4": 0.0, "r5": 0.0},
    "c3": {"r1": 0.0, "r2": 0.0, "r3": 0.0, "r4": 0.9, "r5": 0.0},
}

COUNTERMEASURES = [
    ("c1", "Identity and access management guidance"),
    ("c2", "Dynamic credentials"),
    ("c3", "Protection against live VM migration tampering"),
]

# Full-precision risk levels recomputed from the matrix above by hand:
#   r1: 0.6 * (0.2*0.65 + 0.2*0.85 + 0.3*0.75 + 0.3*0.8)  = 0.6 * 0.765 = 0.459
#   r2: 0.2 * (0.2*0.15 + 0.2*0.35 + 0.3*0.8  + 0.3*0.65) = 0.2 * 0.535 = 0.107
#   r3: 0.5 * (0.2*0.4  + 0.2*0.3  + 0.3*0.25 + 0.3*0.1)  = 0.5 * 0.245 = 0.1225
#   r4: 0.7 * (0.2*0.85 + 0.2*0.8  + 0.3*0.7  + 0.3*0.6)  = 0.7 * 0.72  = 0.504
#   r5: 0.3 * (0.2*0.1  + 0.2*0.3  + 0.3*0.7  + 0.3*0.2)  = 0.3 * 0.35  = 0.105
EXPECTED_LEVELS = {
    "r1": 0.459,
    "r2": 0.107,
    "r3": 0.1225,
    "r4": 0.504,
    "r5": 0.105,
}

EXPECTED_GRL = 1.2975
