"""Defaults and constants shared across all packages."""

# ---------------------------------------------------------------------------
# Deployment (10..100 active nodes over 5 MEC servers)
# ---------------------------------------------------------------------------
DEFAULT_NUM_USERS = 50
DEFAULT_NUM_SERVERS = 5
DEFAULT_TASKS_PER_USER_MAX = 10
DEFAULT_NODE_COUNTS: tuple[int, ...] = tuple(range(10, 101, 10))
DEFAULT_CARRIER_FREQ_HZ = 5e9  # echoed in reports, no behavioural effect

# ---------------------------------------------------------------------------
# Traffic
# ---------------------------------------------------------------------------
DEFAULT_ARRIVAL_RATE = 0.04  # tasks / slot / user (Poisson)
DEFAULT_DATA_SIZE_BITS = 1_000_000_000  # 1 Gb per task
DEFAULT_CYCLES_PER_BIT = 10
DEFAULT_SLOT_DURATION_S = 1.0
DEFAULT_SLOTS_PER_EPISODE = 20

# ---------------------------------------------------------------------------
# Rates: 10 Mb/s uplink, 0.5..1 Gb/s server processing, 16 Mb/s on-device
# ---------------------------------------------------------------------------
DEFAULT_LINK_RATE_BPS = 1e7
DEFAULT_SERVER_CPU_HZ = 1e10  # fastest server
DEFAULT_SLOWEST_SERVER_RATIO = 0.5  # server 1 runs at this fraction, the rest spaced linearly up to 1
DEFAULT_LOCAL_CPU_HZ = 1.6e8

# ---------------------------------------------------------------------------
# Queues
# ---------------------------------------------------------------------------
DEFAULT_LOCAL_QUEUE_CAPACITY = 1
DEFAULT_SERVER_QUEUE_LIMIT = 10
DEFAULT_SERVER_CAPACITY_CYCLES = 1e11

# ---------------------------------------------------------------------------
# Energy model  E_comp = κ · cycles · f²,  E_tx = P_tx · t_comm
# ---------------------------------------------------------------------------
DEFAULT_TX_POWER_W = 0.01
DEFAULT_KAPPA_LOCAL = 2e-26  # 5.12 J per local task
DEFAULT_KAPPA_SERVER = 4e-31  # 0.1 J on the slowest server, 0.4 J on the fastest

# ---------------------------------------------------------------------------
# Objective / QoS
# ---------------------------------------------------------------------------
DEFAULT_W_A = 5
DEFAULT_W_B = 5
DEFAULT_PHI = 10
DEFAULT_LATENCY_BOUND_S = 200.0
DEFAULT_OPTIMIZER_NODE_LIMIT = 50_000
ORACLE_MAX_LEAVES = 10**6

# ---------------------------------------------------------------------------
# Learning / experiments
# ---------------------------------------------------------------------------
DEFAULT_EPISODES = 100
DEFAULT_EVAL_EPISODES = 10
DEFAULT_LEARNING_RATE = 0.7
DEFAULT_DISCOUNT = 0.5
DEFAULT_EXPLORATION = 0.1
DEFAULT_MONTE_CARLO_RUNS = 20
DEFAULT_LOAD_BUCKETS = 4
DEFAULT_SEED = 42

# ---------------------------------------------------------------------------
# Process environment overrides (read after ``load_dotenv``)
# ---------------------------------------------------------------------------
ENV_LOG_LEVEL = "OFFLOAD_LOG_LEVEL"
ENV_WORKERS = "OFFLOAD_WORKERS"
