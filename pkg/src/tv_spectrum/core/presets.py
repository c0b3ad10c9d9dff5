## Named parameter tables: solver profiles, scale grid profiles, band palette
## and the synthetic phantom layouts used by the experiments and the CLI.

# Solver profiles. "paper" is the full-length run; "test" is the desk-scale
# profile with early stopping.
SOLVER_PROFILES = {
    "paper": {
        "tau": 0.2,
        "sigma": 0.625,
        "theta": 1.0,
        "max_its": 50000,
        "rel_tol": 0.0,
    },
    "test": {
        "tau": 0.2,
        "sigma": 0.625,
        "theta": 1.0,
        "max_its": 5000,
        "rel_tol": 1e-8,
    },
}

# Scale grid profiles: synthetic phantoms use 20 linear scales, experimental
# images 50.
SCALE_PROFILES = {
    "synthetic": {"n_scales": 20, "spacing": "linear"},
    "experimental": {"n_scales": 50, "spacing": "linear"},
}

DEFAULT_T_MIN = 0.5
# Default t_max is this factor times max(width, height) / 4
DEFAULT_T_MAX_FACTOR = 1.25

# Eight distinguishable band colours, cycled by band label
PALETTE = (
    (0.894, 0.102, 0.110),  # red
    (1.000, 0.498, 0.000),  # orange
    (0.302, 0.686, 0.290),  # green
    (0.216, 0.494, 0.722),  # blue
    (0.596, 0.306, 0.639),  # purple
    (1.000, 1.000, 0.200),  # yellow
    (0.651, 0.337, 0.157),  # brown
    (0.969, 0.506, 0.749),  # pink
)

# Phantom layouts: disc entries are (center_x, center_y, radius, contrast)
PHANTOM_PRESETS = {
    # four sizes, one intensity; the smallest area stays above a tenth of the
    # largest so every disc clears the default peak prominence
    "four-disc-sizes": {
        "width": 128,
        "height": 128,
        "background": 0.0,
        "discs": [
            (32.0, 32.0, 7.0, 1.0),
            (96.0, 32.0, 11.0, 1.0),
            (32.0, 96.0, 15.0, 1.0),
            (96.0, 96.0, 19.0, 1.0),
        ],
    },
    # one size, four intensities
    "four-disc-intensities": {
        "width": 128,
        "height": 128,
        "background": 0.0,
        "discs": [
            (32.0, 32.0, 10.0, 0.25),
            (96.0, 32.0, 10.0, 0.5),
            (32.0, 96.0, 10.0, 0.75),
            (96.0, 96.0, 10.0, 1.0),
        ],
    },
    # small bright and large dim disc vanishing together under L2
    "two-disc-mixed": {
        "width": 128,
        "height": 128,
        "background": 0.0,
        "discs": [
            (36.0, 64.0, 6.0, 1.0),
            (88.0, 64.0, 20.0, 0.3),
        ],
    },
    # small bright disc on top of a large dim one
    "nested-discs": {
        "width": 96,
        "height": 96,
        "background": 0.0,
        "discs": [
            (48.0, 48.0, 20.0, 0.3),
            (48.0, 48.0, 6.0, 1.0),
        ],
    },
    "contrast-pair": {
        "width": 96,
        "height": 96,
        "background": 0.0,
        "discs": [
            (28.0, 48.0, 10.0, 0.05),
            (68.0, 48.0, 10.0, 1.0),
        ],
    },
}
