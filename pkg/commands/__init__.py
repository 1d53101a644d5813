# Subcommand packages loaded by the runner
