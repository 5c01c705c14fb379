PROBLEMS = {
    "P1": {
        "name": "Forrester",
        "description": "One-dimensional Forrester function with two linearly corrupted lower fidelities.",
        "lower": 0.0,
        "upper": 1.0,
        "dims": (1,),
        "max_levels": 3,
        "x_check": 0.7572,  # physical coordinate, repeated in every dimension
        "f_check": -6.0207,
        "r1_divisor": 1.0,
    },
    "P2": {
        "name": "Griewank",
        "description": "Griewank function with cosine-only and rescaled lower fidelities.",
        "lower": -6.0,
        "upper": 5.0,
        "dims": (2,),
        "max_levels": 3,
        "x_check": 0.0,
        "f_check": 0.0,
        "r1_divisor": 1.0,
    },
    "P3": {
        "name": "Rosenbrock",
        "description": "Rosenbrock valley; the noise range is reduced because f1 spans three orders of magnitude.",
        "lower": -2.0,
        "upper": 2.0,
        "dims": (2, 5, 10),
        "max_levels": 3,
        "x_check": 1.0,
        "f_check": 0.0,
        "r1_divisor": 500.0,
    },
    "P4": {
        "name": "Shifted-rotated Rastrigin",
        "description": "Rastrigin function in rotated coordinates; lower fidelities add a resolution error e_r(z, phi).",
        "lower": -0.1,
        "upper": 0.2,
        "dims": (2, 5, 10),
        "max_levels": 3,
        "x_check": 0.1,
        "f_check": 0.0,
        "r1_divisor": 1.0,
        "phi": (10000.0, 5000.0, 2500.0),  # phi_i of table level i; phi_1 gives e_r = 0
        "theta": 0.2,
        "shift": 0.1,
    },
}
