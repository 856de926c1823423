import os

# Integrator defaults (see apps.propagator.structures)
LZ_STEP_TOLERANCE = float(os.getenv('LZ_STEP_TOLERANCE', '1e-10'))
LZ_MAX_STEP = float(os.getenv('LZ_MAX_STEP', '0.05'))
LZ_PHASE_PER_STEP = float(os.getenv('LZ_PHASE_PER_STEP', '0.5'))

# Infinite-time limit policy
LZ_PROBABILITY_TOLERANCE = float(os.getenv('LZ_PROBABILITY_TOLERANCE', '1e-4'))
LZ_TIME_SCALE = float(os.getenv('LZ_TIME_SCALE', '25'))
LZ_MAX_RUNGS = int(os.getenv('LZ_MAX_RUNGS', '5'))
LZ_ENDPOINT_SAMPLES = int(os.getenv('LZ_ENDPOINT_SAMPLES', '16'))

# Seconds a cached survival probability stays valid; results are deterministic.
LZ_CACHE_TIMEOUT = int(os.getenv('LZ_CACHE_TIMEOUT', str(24 * 3600)))

# Default directory for result files written by the management commands.
LZ_OUTPUT_DIR = os.getenv('LZ_OUTPUT_DIR', 'results')
