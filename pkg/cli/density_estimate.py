import os

from absl import app, logging

from cli.session import command
from dmkde.args import density_from_flags
from dmkde.io import write_csv, write_json
from dmkde.pipeline import run_density_experiment


@command
def main(logdir):
    frame, summary = run_density_experiment(density_from_flags())
    write_csv(frame, os.path.join(logdir, 'density.csv'))
    write_json(os.path.join(logdir, 'summary.json'), summary)
    logging.info('density curves written to %s', logdir)


if __name__ == '__main__':
    app.run(main)
