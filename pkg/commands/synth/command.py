from dataclasses import asdict
from pathlib import Path

import numpy as np

from commands.base import BaseCommand
from config.run_config import RunConfig
from pipeline.recordings import save_recordings
from pipeline.synthetic import generate_synthetic

RECORDINGS_FILE = "recordings.csv"


class SynthCommand(BaseCommand):
    """Generate a synthetic labeled dataset in the canonical CSV format."""

    name = "synth"

    def run(self, config: RunConfig, out_dir: Path) -> None:
        synthetic = config.data.synthetic
        rs = generate_synthetic(synthetic)
        path = save_recordings(rs, out_dir / RECORDINGS_FILE)
        self.runner.logger.artifact(path)

        labels = np.concatenate([rec.labels for rec in rs])
        self.save_report(out_dir, {
            "command": self.name,
            "synthetic": asdict(synthetic),
            "subjects": rs.subject_ids,
            "channels": rs.channels,
            "samples": int(labels.size),
            "class_counts": np.bincount(labels, minlength=synthetic.num_classes).tolist(),
            "recordings_file": RECORDINGS_FILE,
        })


def setup(runner):
    """Add the synth command to the runner."""
    runner.add_command(SynthCommand(runner))
