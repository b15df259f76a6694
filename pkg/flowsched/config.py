"""
FLOWSCHED CONFIGURATION
Environment-driven limits for the oracles, the QPTAS and the bench harness
"""
import os
import logging

from dotenv import load_dotenv

# .env in the working directory wins over nothing, never over the real environment
load_dotenv()

logger = logging.getLogger(__name__)

# Logging
LOG_LEVEL = os.getenv("FLOWSCHED_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Exact oracles
ORACLE_MAX_WORK = int(os.getenv("FLOWSCHED_ORACLE_MAX_WORK", "20"))
ORACLE_MAX_HORIZON = int(os.getenv("FLOWSCHED_ORACLE_MAX_HORIZON", "32"))
ORACLE_MAX_SLOTS = int(os.getenv("FLOWSCHED_ORACLE_MAX_SLOTS", "24"))
ORACLE_MAX_STATES = int(os.getenv("FLOWSCHED_ORACLE_MAX_STATES", "2000000"))

# QPTAS guardrails
QPTAS_STATE_BUDGET = int(os.getenv("FLOWSCHED_QPTAS_STATE_BUDGET", "10000000"))
QPTAS_MAX_MACHINES = int(os.getenv("FLOWSCHED_QPTAS_MAX_MACHINES", "3"))
QPTAS_MAX_COMPLEXITY = int(os.getenv("FLOWSCHED_QPTAS_MAX_COMPLEXITY", "256"))

# Cost arithmetic
MAX_P_TERM = int(os.getenv("FLOWSCHED_MAX_P_TERM", "8"))
DECIMAL_PRECISION = int(os.getenv("FLOWSCHED_DECIMAL_PRECISION", "60"))

# Bench harness
BENCH_WORKERS = int(os.getenv("FLOWSCHED_BENCH_WORKERS", "1"))

if DECIMAL_PRECISION < 30:
    logger.warning(f"⚠️ FLOWSCHED_DECIMAL_PRECISION={DECIMAL_PRECISION} is below 30 digits, "
                   f"certified cost comparisons may fall back to the margin more often")
