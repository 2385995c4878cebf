"""python -m cli <train-aff|density-estimate|detect|sweep> --flagfile=..."""
from absl import app

from cli import density_estimate, detect, sweep, train_aff

COMMANDS = {
    'train-aff': train_aff.main,
    'density-estimate': density_estimate.main,
    'detect': detect.main,
    'sweep': sweep.main,
}


def main(argv):
    if len(argv) != 2 or argv[1] not in COMMANDS:
        raise app.UsageError(
            'expected exactly one subcommand out of %s' % ', '.join(COMMANDS))
    COMMANDS[argv[1]](argv[1:])


if __name__ == '__main__':
    app.run(main)
