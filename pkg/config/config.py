import os
from dotenv import load_dotenv
import logging

# Load environment variables
load_dotenv()

DEBUG_MODE = os.getenv('DEBUG_MODE', 'false').lower() == 'true'

# Worker thread cap for sweeps and torch intra-op threads (0 = all cores)
try:
    CPC_SEQ_THREADS = int(os.getenv('CPC_SEQ_THREADS', '0'))
except ValueError:
    print(f"WARNING: CPC_SEQ_THREADS '{os.getenv('CPC_SEQ_THREADS')}' is not a valid integer. Using all cores.")
    CPC_SEQ_THREADS = 0

# Logging Configuration
LOG_LEVEL = logging.DEBUG if DEBUG_MODE else logging.INFO
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

# Data Preparation
TARGET_RATE_HZ = 30.0
WINDOW_SECONDS = 1.0
OVERLAP_FRACTION = 0.5
TEST_FRACTION = 0.20
VAL_FRACTION = 0.20
NORMALIZATION_EPSILON = 1e-8
UNLABELED = -1

# USC-HAD protocol: participants 1-10 train, 11-12 validation, 13-14 test
USC_HAD_SPLIT = {
    'train': [str(i) for i in range(1, 11)],
    'val': ['11', '12'],
    'test': ['13', '14'],
}

# Network Settings
LATENT_DIM = 128
ENCODER_WIDTHS = (32, 64, 128)
CONV_KERNEL_SIZES = (3, 5, 7, 9)
RECURRENT_HIDDEN = 128
CONTEXT_DIM = 256
GAR_LAYERS = 2
DROPOUT_P = 0.2
CLASSIFIER_WIDTHS = (256, 128)

# Pre-training Settings
K_GRID = (2, 4, 8, 12, 16)
DEFAULT_K = 12
PRETRAIN_LR_GRID = (1e-3, 5e-4)
PRETRAIN_EPOCHS = 150
BATCH_SIZE = 64
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8

# Fine-tuning Settings
FINETUNE_LR_GRID = (5e-4, 1e-4)
FINETUNE_EPOCHS = 150
LR_DECAY_FACTOR = 0.8
LR_DECAY_EVERY = 25

# Evaluation Settings
LABEL_BUDGETS = (1, 2, 5, 10, 25, 50, 100)
NUM_SEEDS = 5

# Checkpoint container
CHECKPOINT_FORMAT_VERSION = 1
CHECKPOINT_FILE = 'checkpoint.bin'
CLASSIFIER_FILE = 'classifier.bin'
HISTORY_FILE = 'history.json'
REPORT_FILE = 'report.json'
RESOLVED_CONFIG_FILE = 'config.json'

# Exit Codes
EXIT_CODES = {
    'success': 0,
    'usage': 1,
    'data': 2,
    'numeric': 3,
}

# Error Messages
ERROR_MESSAGES = {
    'no_context': 'horizon leaves no context',
    'no_negatives': 'no negatives available',
    'no_recordings': 'no recordings',
    'out_exists': 'Output directory already exists. Pass --force to overwrite it.',
    'missing_config': 'Config file not found',
    'missing_checkpoint': 'This command needs a checkpoint (--checkpoint or config "checkpoint").',
    'bad_overlap': 'overlap_fraction must lie in [0, 1)',
    'bad_rate': 'target_hz must be positive',
}
