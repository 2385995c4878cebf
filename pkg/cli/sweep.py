import os
import sys

from absl import app, logging

from cli.session import command
from dmkde.args import experiment_from_flags, sweep_grid_from_flags
from dmkde.io import write_csv
from dmkde.pipeline import run_sweep


@command
def main(logdir):
    config = experiment_from_flags()
    if not (config.data_path and config.label_column):
        raise app.UsageError('--data_path and --label_column are required')

    frame = run_sweep(config, sweep_grid_from_flags())
    write_csv(frame, os.path.join(logdir, 'sweep.csv'))
    failed = int((frame['status'] == 'failed').sum())
    logging.info('sweep finished: %d/%d configurations ok', len(frame) - failed, len(frame))
    if failed == len(frame):
        logging.error('every sweep configuration failed')
        sys.exit(1)


if __name__ == '__main__':
    app.run(main)
