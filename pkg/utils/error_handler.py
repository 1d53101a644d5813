import traceback
import sys
from typing import Any, Dict, List, Optional

from config.config import EXIT_CODES


class CpcError(Exception):
    """Base class for every failure the toolkit reports to the runner."""

    exit_code = EXIT_CODES['usage']


class UsageError(CpcError):
    """Bad command line: unknown subcommand or flag, conflicting flags."""

    exit_code = EXIT_CODES['usage']


class ConfigError(CpcError, ValueError):
    """Invalid configuration or parameter value."""

    exit_code = EXIT_CODES['usage']


class DataError(CpcError, ValueError):
    """Input data that cannot be used: missing files, bad rows, shape mismatches."""

    exit_code = EXIT_CODES['data']


class NumericError(CpcError):
    """
    Training produced a non-finite loss.

    Attributes:
        history: Epoch records completed before the failure
    """

    exit_code = EXIT_CODES['numeric']

    def __init__(self, message: str, history: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.history = list(history or [])


def handle_command_error(command_name: str, error: BaseException, logger=None) -> int:
    """
    Handle errors that occur during command execution.

    Args:
        command_name: Subcommand that was running
        error: The error that occurred
        logger: Logger used to record the failure (falls back to stderr)

    Returns:
        int: Process exit code for the error
    """
    exit_code = error.exit_code if isinstance(error, CpcError) else EXIT_CODES['usage']
    message = f"Error in command {command_name}: {error}"

    if logger is not None:
        if isinstance(error, CpcError):
            logger.error(message)
        else:
            # Unexpected failures keep their traceback
            logger.error(message, exc_info=error)
    else:
        log_error(error, context=command_name)

    return exit_code


def log_error(error, context=None):
    """
    Log an error to the console.

    Args:
        error (Exception): The error that occurred
        context (str, optional): Additional context about where the error occurred
    """
    if context:
        print(f"Error in {context}:", file=sys.stderr)
    else:
        print("Error:", file=sys.stderr)

    traceback.print_exception(type(error), error, error.__traceback__, file=sys.stderr)
