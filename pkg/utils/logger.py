import logging
import platform
import sys
import traceback
from pathlib import Path
from typing import Optional, Sequence

from config.config import LOG_LEVEL, LOG_FORMAT, LOG_DATE_FORMAT


class RunLogger:
    """Logging utility for a single toolkit run.

    This class provides structured logging with different output formats for
    console and file, error tracking, and training-specific logging methods.
    Handlers are attached to the root logger so records from library modules
    (which log through ``logging.getLogger(__name__)``) land in the run's files.
    """

    def __init__(self, log_dir: Optional[Path] = None, name: Optional[str] = None):
        """Initialize the logger with console and, optionally, file handlers.

        Args:
            log_dir: Directory receiving run.log and errors.log; console only when None
            name: Logger name, defaults to the root logger
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(LOG_LEVEL)
        self._handlers = []

        self._setup_console_handler()
        if log_dir is not None:
            log_dir = Path(log_dir)
            log_dir.mkdir(parents=True, exist_ok=True)
            self._setup_file_handlers(log_dir)

    def _setup_file_handlers(self, log_dir: Path) -> None:
        """Set up file handlers for general logs and errors.

        Args:
            log_dir: Directory to store log files
        """
        # General logs
        file_handler = logging.FileHandler(filename=log_dir / "run.log", encoding='utf-8')
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
        self._add_handler(file_handler)

        # Error logs with full tracebacks
        error_handler = logging.FileHandler(filename=log_dir / "errors.log", encoding='utf-8')
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
        self._add_handler(error_handler)

    def _setup_console_handler(self) -> None:
        """Set up console handler with colored output."""
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setFormatter(logging.Formatter(
            '\033[92m[%(asctime)s]\033[0m \033[94m%(levelname)s\033[0m: %(message)s',
            '%H:%M:%S'
        ))
        self._add_handler(console_handler)

    def _add_handler(self, handler: logging.Handler) -> None:
        self.logger.addHandler(handler)
        self._handlers.append(handler)

    def close(self) -> None:
        """Detach and close every handler this logger installed."""
        for handler in self._handlers:
            self.logger.removeHandler(handler)
            handler.close()
        self._handlers = []

    def debug(self, message: str, **kwargs) -> None:
        self.logger.debug(message, **kwargs)

    def info(self, message: str, **kwargs) -> None:
        self.logger.info(message, **kwargs)

    def warning(self, message: str, **kwargs) -> None:
        self.logger.warning(message, **kwargs)

    def error(self, message: str, exc_info: Optional[BaseException] = None, **kwargs) -> None:
        """Log an error message with optional exception info.

        Args:
            message: Error message to log
            exc_info: Optional exception for traceback
            **kwargs: Additional logging arguments
        """
        if exc_info:
            tb = ''.join(traceback.format_exception(type(exc_info), exc_info, exc_info.__traceback__))
            message = f"{message}\n{tb}"
        self.logger.error(message, **kwargs)

    def startup(self, command: str, seed: int, deterministic: bool) -> None:
        """Log run startup information.

        Args:
            command: Subcommand being executed
            seed: Run seed
            deterministic: Whether single-threaded deterministic mode is on
        """
        import torch

        self.logger.info(f"=== Starting {command} ===")
        self.logger.info(f"Python Version: {platform.python_version()}")
        self.logger.info(f"Torch Version: {torch.__version__}")
        self.logger.info(f"Seed: {seed} | Deterministic: {deterministic}")

    def epoch(
        self,
        stage: str,
        epoch: int,
        total: int,
        loss: float,
        accuracy: Optional[Sequence[float]] = None,
        learning_rate: Optional[float] = None,
        val_loss: Optional[float] = None,
    ) -> None:
        """Log one line per finished epoch and flush the file handlers.

        Args:
            stage: Training stage (pretrain/finetune)
            epoch: Zero-based epoch index
            total: Number of epochs
            loss: Mean training loss of the epoch
            accuracy: Optional per-step pretext accuracy or validation score
            learning_rate: Learning rate used in the epoch
            val_loss: Optional validation loss
        """
        message = f"[{stage}] epoch {epoch + 1}/{total} loss={loss:.5f}"
        if val_loss is not None:
            message += f" val_loss={val_loss:.5f}"
        if accuracy is not None and len(accuracy):
            message += " acc=" + ",".join(f"{a:.3f}" for a in accuracy)
        if learning_rate is not None:
            message += f" lr={learning_rate:.2e}"
        self.logger.info(message)
        for handler in self._handlers:
            handler.flush()

    def sweep_point(self, axis: str, setting: str, seed: int, mean_f1: float) -> None:
        """Log one finished sweep run.

        Args:
            axis: Sweep axis
            setting: Setting label on that axis
            seed: Seed of the run
            mean_f1: Test mean F1 of the run
        """
        self.logger.info(f"Sweep {axis} [{setting}] seed={seed}: mean_f1={mean_f1:.4f}")

    def artifact(self, path: Path) -> None:
        self.logger.info(f"Wrote {path}")
