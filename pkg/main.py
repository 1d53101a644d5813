import argparse
import importlib
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence

from config.config import ERROR_MESSAGES, EXIT_CODES, HISTORY_FILE, RESOLVED_CONFIG_FILE
from config.run_config import COMMANDS, RunConfig, load_run_config, validate_config
from evaluation.reports import write_json
from utils.error_handler import CpcError, NumericError, UsageError, handle_command_error
from utils.logger import RunLogger
from utils.runtime import configure_determinism

# Command packages loaded at startup
ACTIVE_COMMANDS = ['synth', 'pretrain', 'finetune', 'evaluate', 'sweep']


class UsageParser(argparse.ArgumentParser):
    """Argument parser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def build_parser() -> UsageParser:
    shared = UsageParser(add_help=False)
    shared.add_argument('--config', help='Run configuration (JSON)')
    shared.add_argument('--out', dest='out_dir', help='Output directory')
    shared.add_argument('--seed', type=int, help='Run seed')
    mode = shared.add_mutually_exclusive_group()
    mode.add_argument('--deterministic', dest='deterministic', action='store_const', const=True,
                      help='Single-threaded, bit-reproducible numerics')
    mode.add_argument('--parallel', dest='deterministic', action='store_const', const=False,
                      help='Allow multi-threaded numerics and parallel sweep points')
    shared.add_argument('--force', action='store_const', const=True, help='Write into an existing output directory')
    shared.add_argument('--checkpoint', help='Checkpoint or classifier container to start from')

    parser = UsageParser(prog='main.py', description='CPC representation learning for sensor time series')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[shared])
    return parser


class CpcRunner:
    """
    Command-line runner.

    Loads the command packages by name and executes one command per
    invocation, writing every artifact under the run's output directory.
    """

    def __init__(self):
        self.commands: Dict[str, object] = {}
        self.logger = RunLogger()
        self._load_commands()

    def _load_commands(self) -> None:
        for command_name in ACTIVE_COMMANDS:
            try:
                module = importlib.import_module(f"commands.{command_name}")
                module.setup(self)
                self.logger.debug(f"Loaded command: {command_name}")
            except Exception as e:
                self.logger.error(f"Failed to load command {command_name}: {e}", exc_info=e)

    def add_command(self, command) -> None:
        self.commands[command.name] = command

    def close(self) -> None:
        self.logger.close()

    def _prepare_out_dir(self, config: RunConfig) -> Path:
        if not config.out_dir:
            raise UsageError("--out is required (or 'out_dir' in the config file)")
        out_dir = Path(config.out_dir)
        if out_dir.exists() and any(out_dir.iterdir()) and not config.force:
            raise UsageError(f"{ERROR_MESSAGES['out_exists']} ({out_dir})")
        out_dir.mkdir(parents=True, exist_ok=True)
        return out_dir

    def execute(self, args: argparse.Namespace) -> int:
        overrides = {
            'command': args.command,
            'out_dir': args.out_dir,
            'seed': args.seed,
            'deterministic': args.deterministic,
            'force': args.force,
            'checkpoint': args.checkpoint,
        }
        config = load_run_config(args.config, overrides)
        problems = validate_config(config)
        if problems:
            for problem in problems:
                self.logger.error(f"Invalid config: {problem}")
            return EXIT_CODES['usage']

        out_dir = self._prepare_out_dir(config)
        write_json(out_dir / RESOLVED_CONFIG_FILE, config.to_dict())

        # Re-open the logger with the run's log files
        self.logger.close()
        self.logger = RunLogger(out_dir)
        self.logger.startup(config.command, config.seed, config.deterministic)
        configure_determinism(config.deterministic)

        command = self.commands.get(config.command)
        if command is None:
            raise UsageError(f"Command '{config.command}' is not loaded")
        try:
            command.run(config, out_dir)
        except NumericError as e:
            # Keep the epochs completed before the failure
            write_json(out_dir / HISTORY_FILE, {"epochs": e.history, "error": str(e)})
            return handle_command_error(config.command, e, self.logger)
        except Exception as e:
            return handle_command_error(config.command, e, self.logger)
        self.logger.info(f"=== {config.command} complete ===")
        return EXIT_CODES['success']


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse ``argv``, execute the requested command and return the exit code.

    Returns:
        int: 0 success, 1 usage or configuration error, 2 data error, 3 non-finite loss
    """
    parser = build_parser()
    runner: Optional[CpcRunner] = None
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
        runner = CpcRunner()
        return runner.execute(args)
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_CODES['success']
    except CpcError as e:
        if runner is None:
            print(f"Error: {e}", file=sys.stderr)
            return e.exit_code
        return handle_command_error('main', e, runner.logger)
    finally:
        if runner is not None:
            runner.close()


def main() -> None:
    """Main entry point."""
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
